// Pure DOM renderers. Every number they draw is a verbatim field from a
// service response (formatted for display, never recomputed); the contract
// tests hold them to that.

import type {
  Disagreement,
  SensitivityResponse,
  StakeholderScore,
  ThresholdsResponse,
  Triggers,
} from "./api.js";

export function fmt(x: number, digits = 4): string {
  return x.toFixed(digits);
}

function clear(el: HTMLElement): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

function barRow(label: string, value: number, cssClass: string): HTMLElement {
  const row = document.createElement("div");
  row.className = "bar-row";
  const name = document.createElement("span");
  name.className = "bar-label";
  name.textContent = label;
  const track = document.createElement("div");
  track.className = "bar-track";
  const fill = document.createElement("div");
  fill.className = `bar-fill ${cssClass}`;
  fill.style.width = `${Math.min(100, Math.max(0, value * 100))}%`;
  track.appendChild(fill);
  const num = document.createElement("span");
  num.className = "bar-value";
  num.textContent = fmt(value);
  row.append(name, track, num);
  return row;
}

export function renderOmegaBars(el: HTMLElement, omega: number[], groups: readonly string[]): void {
  clear(el);
  omega.forEach((w, i) => el.appendChild(barRow(groups[i] ?? `group ${i}`, w, "omega")));
}

export function renderConsensusBars(
  el: HTMLElement,
  weights: number[],
  labels: readonly string[],
): void {
  clear(el);
  weights.forEach((w, i) => el.appendChild(barRow(labels[i] ?? `f${i}`, w, "consensus")));
}

export function renderRangePlot(
  el: HTMLElement,
  per: StakeholderScore[],
  consensus: { score: number; tier: string },
): void {
  clear(el);
  const width = 460;
  const rowH = 22;
  const left = 170;
  const span = width - left - 60;
  const svgNS = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNS, "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(per.length * rowH + 30));
  svg.setAttribute("class", "range-plot");

  const x = (score: number) => left + score * span;

  // tier boundaries at 0.6 / 0.8 as reference lines
  for (const b of [0.6, 0.8]) {
    const line = document.createElementNS(svgNS, "line");
    line.setAttribute("x1", String(x(b)));
    line.setAttribute("x2", String(x(b)));
    line.setAttribute("y1", "4");
    line.setAttribute("y2", String(per.length * rowH + 4));
    line.setAttribute("class", "tier-line");
    svg.appendChild(line);
  }

  const cons = document.createElementNS(svgNS, "line");
  cons.setAttribute("x1", String(x(consensus.score)));
  cons.setAttribute("x2", String(x(consensus.score)));
  cons.setAttribute("y1", "4");
  cons.setAttribute("y2", String(per.length * rowH + 4));
  cons.setAttribute("class", "consensus-line");
  svg.appendChild(cons);

  per.forEach((entry, i) => {
    const cy = i * rowH + 14;
    const label = document.createElementNS(svgNS, "text");
    label.setAttribute("x", "2");
    label.setAttribute("y", String(cy + 4));
    label.setAttribute("class", "range-label");
    label.textContent = entry.group;
    svg.appendChild(label);

    const dot = document.createElementNS(svgNS, "circle");
    dot.setAttribute("cx", String(x(entry.score)));
    dot.setAttribute("cy", String(cy));
    dot.setAttribute("r", "5");
    dot.setAttribute("class", `range-dot tier-${entry.tier}`);
    dot.setAttribute("data-group", entry.group);
    dot.setAttribute("data-score", fmt(entry.score));
    svg.appendChild(dot);

    const value = document.createElementNS(svgNS, "text");
    value.setAttribute("x", String(width - 54));
    value.setAttribute("y", String(cy + 4));
    value.setAttribute("class", "range-value");
    value.textContent = fmt(entry.score);
    svg.appendChild(value);
  });
  el.appendChild(svg);
}

export function renderTriggers(el: HTMLElement, triggers: Triggers): void {
  clear(el);
  for (const level of triggers.levels) {
    const box = document.createElement("div");
    box.className = "trigger";
    box.dataset.level = level.level;

    const lamp = document.createElement("span");
    const fired = level.incident.fired || level.population.fired === true;
    lamp.className = `lamp ${fired ? "lamp-on" : "lamp-off"}`;
    lamp.dataset.fired = String(fired);

    const name = document.createElement("span");
    name.className = "trigger-name";
    name.textContent = level.level;

    const detail = document.createElement("span");
    detail.className = "trigger-detail";
    const pop =
      level.population.fired === null ? "n/a" : level.population.fired ? "fired" : "quiet";
    detail.textContent =
      `s=${String(level.severity_threshold)} a=${String(level.probability_threshold)} ` +
      `incident=${level.incident.fired ? "fired" : "quiet"} population=${pop}`;

    box.append(lamp, name, detail);
    el.appendChild(box);
  }
}

export function renderTierBadge(el: HTMLElement, tier: string): void {
  el.textContent = tier;
  el.className = `tier-badge tier-${tier}`;
}

export function renderDisagreement(el: HTMLElement, d: Disagreement): void {
  el.textContent = d.flagged
    ? `disagreement: max variance ${fmt(d.max_variance)} > τ=${String(d.threshold)}`
    : `aligned: max variance ${fmt(d.max_variance)} ≤ τ=${String(d.threshold)}`;
  el.className = `disagreement ${d.flagged ? "flag-on" : "flag-off"}`;
  el.dataset.flagged = String(d.flagged);
}

export function renderThresholdReadout(
  el: HTMLElement,
  resp: ThresholdsResponse,
  level: string,
): void {
  const entry = resp.levels[level];
  if (!entry) {
    el.textContent = "—";
    return;
  }
  // raw values straight from the response, e.g. "0.8 / 0.01"
  el.textContent = `${String(entry.s)} / ${String(entry.a)}`;
  el.dataset.level = level;
  el.dataset.t = String(resp.t);
}

export function renderScoreSummary(el: HTMLElement, resp: SensitivityResponse): void {
  clear(el);
  const consensus = document.createElement("div");
  consensus.className = "summary-consensus";
  consensus.textContent = `consensus score ${fmt(resp.consensus.score)}`;
  const range = document.createElement("div");
  range.className = "summary-range";
  range.textContent =
    `range [${fmt(resp.score_range.min)}, ${fmt(resp.score_range.max)}]` +
    ` width ${fmt(resp.score_range.width)} · ${resp.stable ? "stable" : "tier-unstable"}`;
  const note = document.createElement("div");
  note.className = "summary-note";
  note.textContent = resp.convention_note;
  el.append(consensus, range, note);
}
