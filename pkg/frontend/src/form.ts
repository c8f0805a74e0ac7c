/**
 * Form state and field validation. Comma decimals are accepted and
 * normalized (bilingual ward); age entered in years is converted to
 * months (x12) before submission. Submission stays disabled while any
 * field is empty or invalid.
 */

export type AgeUnit = "months" | "years";

export interface FormState {
  hr: string;
  bt: string;
  age: string;
  ageUnit: AgeUnit;
}

export type FieldName = "hr" | "bt" | "age";

export type ValidationResult =
  | { ok: true; value: number }
  | { ok: false; message: string };

const RANGES: Record<string, { lo: number; hi: number; label: string }> = {
  hr: { lo: 0, hi: 300, label: "heart rate (bpm)" },
  bt: { lo: 25, hi: 45, label: "temperature (°C)" },
  age_months: { lo: 0, hi: 216, label: "age (months)" },
  age_years: { lo: 0, hi: 18, label: "age (years)" },
};

export function parseDecimal(raw: string): number | null {
  const cleaned = raw.trim().replace(",", ".");
  if (cleaned === "" || !/^[+-]?(\d+\.?\d*|\.\d+)$/.test(cleaned)) {
    return null;
  }
  return Number(cleaned);
}

export function validate(
  field: FieldName,
  raw: string,
  ageUnit: AgeUnit = "months",
): ValidationResult {
  const key = field === "age" ? `age_${ageUnit}` : field;
  const range = RANGES[key];
  const value = parseDecimal(raw);
  if (value === null) {
    return { ok: false, message: "enter a number" };
  }
  if (value < range.lo || value > range.hi) {
    return {
      ok: false,
      message: `${range.label} must be between ${range.lo} and ${range.hi}`,
    };
  }
  return { ok: true, value };
}

export function canSubmit(form: FormState): boolean {
  return (
    validate("hr", form.hr).ok &&
    validate("bt", form.bt).ok &&
    validate("age", form.age, form.ageUnit).ok
  );
}

/** Numeric request body; null while the form is not submittable. */
export function toRequestBody(form: FormState) {
  const hr = validate("hr", form.hr);
  const bt = validate("bt", form.bt);
  const age = validate("age", form.age, form.ageUnit);
  if (!hr.ok || !bt.ok || !age.ok) return null;
  const ageMonths = form.ageUnit === "years" ? age.value * 12 : age.value;
  return { current_hr: hr.value, current_bt: bt.value, age_months: ageMonths };
}
