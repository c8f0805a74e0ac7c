/**
 * DOM rendering of the verdict: horizontal percentile markers stacked
 * by value, the observed-HR dot positioned on the same scale, and the
 * notice / retry banners. Pure DOM writes; all decisions are made in
 * verdict.ts and form.ts.
 */

import type { VerdictView } from "./verdict.js";

export function renderVerdict(root: HTMLElement, view: VerdictView): void {
  root.textContent = "";

  if (view.notice) {
    const notice = document.createElement("p");
    notice.className = "notice";
    notice.textContent = view.notice;
    root.appendChild(notice);
    return;
  }

  const chart = document.createElement("div");
  chart.className = "band-chart";
  const values = view.markers.map((m) => m.bpm);
  const lo = Math.min(...values, view.observedHr ?? Infinity);
  const hi = Math.max(...values, view.observedHr ?? -Infinity);
  const place = (bpm: number) =>
    hi === lo ? 50 : ((bpm - lo) / (hi - lo)) * 90 + 5;

  for (const marker of view.markers) {
    const line = document.createElement("div");
    line.className = "marker";
    line.style.bottom = `${place(marker.bpm)}%`;
    const label = document.createElement("span");
    label.textContent = `${(marker.level * 100).toFixed(0)}th: ${marker.bpm.toFixed(1)} bpm`;
    line.appendChild(label);
    chart.appendChild(line);
  }

  if (view.dot !== "none" && view.observedHr !== null) {
    const dot = document.createElement("div");
    dot.className = `dot dot-${view.dot}`;
    dot.style.bottom = `${place(view.observedHr)}%`;
    dot.title = `observed ${view.observedHr.toFixed(1)} bpm`;
    chart.appendChild(dot);
  }
  root.appendChild(chart);

  const caption = document.createElement("p");
  caption.className = `caption caption-${view.dot}`;
  caption.textContent =
    view.dot === "green"
      ? "Heart rate is within the 5th–95th percentile range."
      : "Heart rate is outside the 5th–95th percentile range.";
  root.appendChild(caption);
}

export function renderRetryBanner(root: HTMLElement, onRetry: () => void): void {
  root.textContent = "";
  const banner = document.createElement("div");
  banner.className = "retry-banner";
  const message = document.createElement("span");
  message.textContent = "Could not reach the prediction service.";
  const button = document.createElement("button");
  button.type = "button";
  button.textContent = "Retry";
  button.addEventListener("click", onRetry);
  banner.appendChild(message);
  banner.appendChild(button);
  root.appendChild(banner);
}
