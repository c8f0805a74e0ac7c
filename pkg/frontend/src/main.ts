/**
 * Page wiring: read the three inputs, validate inline, submit to the
 * service, and render the verdict. The submit button stays disabled
 * until every field parses and sits in range.
 */

import { PredictClient } from "./api.js";
import { resolveServiceUrl } from "./config.js";
import { canSubmit, toRequestBody, validate, type AgeUnit, type FieldName, type FormState } from "./form.js";
import { renderRetryBanner, renderVerdict } from "./render.js";
import { toVerdictView } from "./verdict.js";

const client = new PredictClient(resolveServiceUrl());

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const inputs = {
  hr: el<HTMLInputElement>("hr"),
  bt: el<HTMLInputElement>("bt"),
  age: el<HTMLInputElement>("age"),
};
const unitSelect = el<HTMLSelectElement>("age-unit");
const submitButton = el<HTMLButtonElement>("submit");
const output = el<HTMLDivElement>("output");

function formState(): FormState {
  return {
    hr: inputs.hr.value,
    bt: inputs.bt.value,
    age: inputs.age.value,
    ageUnit: unitSelect.value as AgeUnit,
  };
}

function refreshField(field: FieldName): void {
  const form = formState();
  const raw = form[field];
  const message = el<HTMLSpanElement>(`${field}-message`);
  if (raw.trim() === "") {
    message.textContent = "";
  } else {
    const result = validate(field, raw, form.ageUnit);
    message.textContent = result.ok ? "" : result.message;
  }
  submitButton.disabled = !canSubmit(form);
}

for (const field of ["hr", "bt", "age"] as FieldName[]) {
  inputs[field].addEventListener("input", () => refreshField(field));
}
unitSelect.addEventListener("change", () => refreshField("age"));

async function submit(): Promise<void> {
  const body = toRequestBody(formState());
  if (!body) return;
  try {
    const response = await client.predict(body);
    if (response === null) return; // superseded by a newer submission
    renderVerdict(output, toVerdictView(response, body.current_hr));
  } catch {
    renderRetryBanner(output, () => void submit());
  }
}

submitButton.addEventListener("click", () => void submit());
submitButton.disabled = true;
