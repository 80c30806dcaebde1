// Workbench wiring: builds the DOM, keeps the editable panel in sync,
// previews edits through the stateless sensitivity endpoint, and drives
// the deliberation session lifecycle. Concurrent previews resolve
// last-write-wins via the client's request sequence numbers.

import { ApiClient, type SensitivityResponse } from "./api.js";
import {
  CATEGORIES,
  GROUPS,
  initialState,
  neutralizeUtilities,
  sampleIncident,
  updateProfile,
  updateProposal,
  type WorkbenchState,
} from "./state.js";
import {
  fmt,
  renderConsensusBars,
  renderDisagreement,
  renderOmegaBars,
  renderRangePlot,
  renderScoreSummary,
  renderThresholdReadout,
  renderTierBadge,
  renderTriggers,
} from "./render.js";

export interface AppOptions {
  base?: string;
  debounceMs?: number;
}

export interface App {
  state: WorkbenchState;
  root: HTMLElement;
  whenIdle(): Promise<void>;
}

const UTILITY_FIELDS = [
  ["evidence_score", "evidence", -2, 2, 0.05],
  ["expertise", "expertise", 0, 1, 0.05],
  ["impact", "impact", 0, 1, 0.05],
  ["beta", "beta", 0.5, 1.5, 0.05],
  ["gamma", "gamma", 0.8, 2.0, 0.05],
] as const;

function h(tag: string, attrs: Record<string, string> = {}, text?: string): HTMLElement {
  const el = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  if (text !== undefined) el.textContent = text;
  return el;
}

export function createApp(root: HTMLElement, opts: AppOptions = {}): App {
  const api = new ApiClient(opts.base ?? "");
  const debounceMs = opts.debounceMs ?? 150;
  const state = initialState();
  const incident = sampleIncident();

  // ---- skeleton -----------------------------------------------------------
  root.innerHTML = `
    <header class="topbar">
      <h1>deliberation workbench</h1>
      <div id="session-banner" class="session-banner">no session</div>
    </header>
    <div id="error-box" class="error-box" hidden></div>
    <main class="columns">
      <section class="column editor">
        <div class="phase-box">
          <label>phase t <input id="phase-slider" type="range" min="0" max="1" step="0.01"></label>
          <span id="phase-value"></span>
          <label>level
            <select id="level-select">
              <option>L</option><option>M</option><option selected>H</option>
            </select>
          </label>
          <span class="readout-label">thresholds s/a:</span>
          <span id="threshold-readout" class="threshold-readout">—</span>
        </div>
        <div class="actions">
          <button id="btn-neutral" type="button">equalize utilities</button>
          <button id="btn-start" type="button">start session</button>
          <button id="btn-submit" type="button" disabled>submit round</button>
          <button id="btn-resolve" type="button" disabled>mark resolved</button>
          <button id="btn-precautionary" type="button" disabled>precautionary default</button>
        </div>
        <div id="panel-editor"></div>
      </section>
      <section class="column outputs">
        <h2>stakeholder weights ω</h2>
        <div id="omega-bars"></div>
        <h2>consensus dimension weights</h2>
        <div id="consensus-bars"></div>
        <h2>per-stakeholder scores</h2>
        <div id="range-plot"></div>
        <div class="status-row">
          <span id="tier-badge" class="tier-badge">—</span>
          <span id="disagreement" class="disagreement">—</span>
        </div>
        <h2>triggers</h2>
        <div id="triggers"></div>
        <div id="summary"></div>
      </section>
    </main>
  `;

  const $ = <T extends HTMLElement>(sel: string): T => {
    const el = root.querySelector<T>(sel);
    if (!el) throw new Error(`missing element ${sel}`);
    return el;
  };

  const phaseSlider = $<HTMLInputElement>("#phase-slider");
  const phaseValue = $("#phase-value");
  const levelSelect = $<HTMLSelectElement>("#level-select");
  const editor = $("#panel-editor");

  // ---- in-flight tracking ---------------------------------------------------
  let inflight = 0;
  let timer: ReturnType<typeof setTimeout> | null = null;
  let idleResolvers: Array<() => void> = [];

  function maybeIdle(): void {
    if (inflight === 0 && timer === null) {
      const resolvers = idleResolvers;
      idleResolvers = [];
      for (const r of resolvers) r();
    }
  }

  // Wraps a whole operation (request + render); the idle gate only opens
  // once the DOM work after the await has finished too.
  function runTracked(op: () => Promise<void>): Promise<void> {
    inflight += 1;
    return op().finally(() => {
      inflight -= 1;
      maybeIdle();
    });
  }

  function whenIdle(): Promise<void> {
    if (inflight === 0 && timer === null) return Promise.resolve();
    return new Promise((res) => idleResolvers.push(res));
  }

  // ---- errors ---------------------------------------------------------------
  const errorBox = $("#error-box");

  function showError(err: unknown): void {
    state.lastError = err instanceof Error ? err.message : String(err);
    errorBox.textContent = state.lastError;
    errorBox.hidden = false;
  }

  function clearError(): void {
    state.lastError = null;
    errorBox.hidden = true;
  }

  // ---- rendering --------------------------------------------------------------
  function renderSessionBanner(): void {
    const banner = $("#session-banner");
    if (!state.sessionId) {
      banner.textContent = "no session (previews only)";
    } else if (state.resolved) {
      banner.textContent = `session ${state.sessionId} · round ${state.round} · resolved: ${state.resolutionText ?? ""}`;
    } else {
      banner.textContent = `session ${state.sessionId} · round ${state.round}`;
    }
  }

  function renderOutputs(resp: SensitivityResponse): void {
    renderOmegaBars($("#omega-bars"), resp.omega, GROUPS);
    renderConsensusBars($("#consensus-bars"), resp.consensus_weights, CATEGORIES);
    renderRangePlot($("#range-plot"), resp.per_stakeholder, resp.consensus);
    renderTierBadge($("#tier-badge"), resp.consensus.tier);
    renderDisagreement($("#disagreement"), resp.disagreement);
    renderTriggers($("#triggers"), resp.triggers);
    renderScoreSummary($("#summary"), resp);
  }

  function renderThresholds(): void {
    if (state.thresholds) {
      renderThresholdReadout($("#threshold-readout"), state.thresholds, state.selectedLevel);
    }
  }

  // ---- server calls -------------------------------------------------------------
  function refreshPreview(): Promise<void> {
    return runTracked(async () => {
      const seq = api.nextSeq();
      try {
        const resp = await api.sensitivity(incident, state.panel, state.t);
        if (seq > state.renderedSeq) {
          state.renderedSeq = seq;
          state.latest = resp;
          renderOutputs(resp);
        }
        clearError();
      } catch (err) {
        showError(err);
      }
    });
  }

  function refreshThresholds(): Promise<void> {
    return runTracked(async () => {
      try {
        state.thresholds = await api.thresholds(state.t);
        renderThresholds();
      } catch (err) {
        showError(err);
      }
    });
  }

  function schedulePreview(): void {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      void refreshPreview();
      maybeIdle();
    }, debounceMs);
  }

  function applySession(resp: {
    session_id: string;
    round: number;
    resolved: boolean;
    resolution: { mode: string; score: number; tier: string } | null;
    sensitivity: SensitivityResponse | null;
  }): void {
    state.sessionId = resp.session_id;
    state.round = resp.round;
    state.resolved = resp.resolved;
    if (resp.resolution) {
      state.resolutionText = `${resp.resolution.mode} score ${fmt(resp.resolution.score)} (${resp.resolution.tier})`;
    }
    if (resp.sensitivity) {
      state.renderedSeq = api.nextSeq();
      state.latest = resp.sensitivity;
      renderOutputs(resp.sensitivity);
    }
    renderSessionBanner();
    $<HTMLButtonElement>("#btn-submit").disabled = state.resolved || !state.sessionId;
    $<HTMLButtonElement>("#btn-resolve").disabled = state.resolved || !state.sessionId;
    $<HTMLButtonElement>("#btn-precautionary").disabled = state.resolved || !state.sessionId;
    if (state.resolved) freezeEditing();
  }

  function freezeEditing(): void {
    root.classList.add("resolved");
    root
      .querySelectorAll<HTMLInputElement>("input, select")
      .forEach((el) => (el.disabled = true));
    $<HTMLButtonElement>("#btn-neutral").disabled = true;
    $<HTMLButtonElement>("#btn-start").disabled = true;
  }

  // ---- panel editor ----------------------------------------------------------------
  function buildEditor(): void {
    editor.innerHTML = "";
    for (const profile of state.panel.profiles) {
      const card = h("fieldset", { class: "group-card", "data-group": profile.group });
      card.appendChild(h("legend", {}, profile.group));

      for (const [field, label, min, max, step] of UTILITY_FIELDS) {
        const row = h("label", { class: "slider-row" }, `${label} `);
        const input = h("input", {
          type: "range",
          min: String(min),
          max: String(max),
          step: String(step),
          class: `u-${field}`,
          "data-group": profile.group,
          "data-field": field,
        }) as HTMLInputElement;
        const value = h("span", { class: "slider-value" });
        input.addEventListener("input", () => {
          const num = Number(input.value);
          state.panel = updateProfile(state.panel, profile.group, { [field]: num });
          value.textContent = fmt(num, 2);
          schedulePreview();
        });
        row.append(input, value);
        card.appendChild(row);
      }

      const propBox = h("div", { class: "proposal-box" });
      propBox.appendChild(h("div", { class: "proposal-title" }, "proposal weights"));
      CATEGORIES.forEach((cat, idx) => {
        const row = h("label", { class: "slider-row proposal-row" }, `${cat} `);
        const input = h("input", {
          type: "range",
          min: "0",
          max: "1",
          step: "0.01",
          class: "proposal",
          "data-group": profile.group,
          "data-index": String(idx),
        }) as HTMLInputElement;
        const value = h("span", { class: "slider-value prop-value" });
        input.addEventListener("input", () => {
          state.panel = updateProposal(state.panel, profile.group, idx, Number(input.value));
          syncProposalRow(profile.group);
          schedulePreview();
        });
        row.append(input, value);
        propBox.appendChild(row);
      });
      card.appendChild(propBox);
      editor.appendChild(card);
    }
    syncEditor();
  }

  function syncProposalRow(group: string): void {
    const profile = state.panel.profiles.find((p) => p.group === group);
    if (!profile) return;
    const card = editor.querySelector(`[data-group="${group}"].group-card`);
    if (!card) return;
    card.querySelectorAll<HTMLInputElement>("input.proposal").forEach((input) => {
      const idx = Number(input.dataset.index);
      input.value = String(profile.proposal[idx]);
      const value = input.parentElement?.querySelector(".prop-value");
      if (value) value.textContent = fmt(profile.proposal[idx]!, 3);
    });
  }

  function syncEditor(): void {
    for (const profile of state.panel.profiles) {
      const card = editor.querySelector(`[data-group="${profile.group}"].group-card`);
      if (!card) continue;
      for (const [field] of UTILITY_FIELDS) {
        const input = card.querySelector<HTMLInputElement>(`input.u-${field}`);
        if (input) {
          const num = profile[field];
          input.value = String(num);
          const value = input.parentElement?.querySelector(".slider-value");
          if (value) value.textContent = fmt(num, 2);
        }
      }
      syncProposalRow(profile.group);
    }
  }

  // ---- wiring ------------------------------------------------------------------------
  phaseSlider.value = String(state.t);
  phaseValue.textContent = fmt(state.t, 2);
  phaseSlider.addEventListener("input", () => {
    state.t = Number(phaseSlider.value);
    phaseValue.textContent = fmt(state.t, 2);
    void refreshThresholds();
    schedulePreview();
  });

  levelSelect.addEventListener("change", () => {
    state.selectedLevel = levelSelect.value as WorkbenchState["selectedLevel"];
    renderThresholds();
  });

  $("#btn-neutral").addEventListener("click", () => {
    state.panel = neutralizeUtilities(state.panel);
    syncEditor();
    schedulePreview();
  });

  function sessionAction(call: () => Promise<Parameters<typeof applySession>[0]>): void {
    void runTracked(async () => {
      try {
        applySession(await call());
        clearError();
      } catch (err) {
        showError(err);
      }
    });
  }

  $("#btn-start").addEventListener("click", () => {
    sessionAction(() => api.createSession(incident, state.panel, state.t));
  });

  $("#btn-submit").addEventListener("click", () => {
    if (state.sessionId) {
      const sid = state.sessionId;
      sessionAction(() => api.submitRound(sid, state.panel));
    }
  });

  $("#btn-resolve").addEventListener("click", () => {
    if (state.sessionId) {
      const sid = state.sessionId;
      sessionAction(() => api.resolveSession(sid));
    }
  });

  $("#btn-precautionary").addEventListener("click", () => {
    if (state.sessionId) {
      const sid = state.sessionId;
      sessionAction(() => api.precautionaryDefault(sid));
    }
  });

  buildEditor();
  renderSessionBanner();
  void refreshThresholds();
  void refreshPreview();

  return { state, root, whenIdle };
}
