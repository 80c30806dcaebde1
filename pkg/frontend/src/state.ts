// Workbench state and panel-editing helpers. Proposal edits re-normalize
// onto the probability simplex here; all scoring stays server-side.

import type { PanelDoc, ProfileDoc, SensitivityResponse, ThresholdsResponse } from "./api.js";

export const GROUPS = [
  "democratic-institutions",
  "civil-society",
  "regulatory-bodies",
  "technical-experts",
  "affected-communities",
  "industry-representatives",
  "academic-researchers",
] as const;

export const CATEGORIES = ["disc", "surv", "elec", "manip", "civic", "capture", "emerg"] as const;

export interface WorkbenchState {
  sessionId: string | null;
  round: number;
  resolved: boolean;
  resolutionText: string | null;
  t: number;
  panel: PanelDoc;
  latest: SensitivityResponse | null;
  thresholds: ThresholdsResponse | null;
  selectedLevel: "L" | "M" | "H";
  lastError: string | null;
  renderedSeq: number;
}

// Starting panel: deliberately varied utilities so aggregation is visible.
const DEFAULT_PROFILES: Array<[string, number[], number, number, number, number, number]> = [
  ["democratic-institutions", [0.1, 0.1, 0.3, 0.15, 0.15, 0.1, 0.1], 0.1, 0.6, 0.5, 1.0, 1.0],
  ["civil-society", [0.1, 0.15, 0.1, 0.1, 0.3, 0.15, 0.1], 0.0, 0.5, 0.7, 0.9, 1.2],
  ["regulatory-bodies", [0.1, 0.1, 0.15, 0.1, 0.1, 0.35, 0.1], 0.05, 0.7, 0.4, 1.1, 0.9],
  ["technical-experts", [0.1, 0.1, 0.1, 0.15, 0.1, 0.1, 0.35], 0.2, 0.9, 0.2, 1.5, 0.8],
  ["affected-communities", [0.25, 0.25, 0.1, 0.1, 0.15, 0.05, 0.1], -0.05, 0.4, 1.0, 0.8, 2.0],
  ["industry-representatives", [1 / 7, 1 / 7, 1 / 7, 1 / 7, 1 / 7, 1 / 7, 1 / 7], 0.0, 0.6, 0.3, 1.0, 0.8],
  ["academic-researchers", [0.15, 0.15, 0.1, 0.15, 0.15, 0.1, 0.2], 0.15, 0.8, 0.3, 1.3, 0.9],
];

export function defaultPanel(): PanelDoc {
  return {
    profiles: DEFAULT_PROFILES.map(([group, proposal, evidence, expertise, impact, beta, gamma]) => ({
      group,
      proposal: [...proposal],
      evidence_score: evidence,
      expertise,
      impact,
      alpha: 1.0,
      beta,
      gamma,
    })),
  };
}

// Equalize the utility inputs across all groups (proposals untouched):
// every group then carries the same utility, so the stakeholder weights
// come back as seven 1/7 bars.
export function neutralizeUtilities(panel: PanelDoc): PanelDoc {
  return {
    profiles: panel.profiles.map((p) => ({
      ...p,
      proposal: [...p.proposal],
      evidence_score: 0.0,
      expertise: 0.5,
      impact: 0.5,
      alpha: 1.0,
      beta: 1.0,
      gamma: 1.0,
    })),
  };
}

// Set one proposal entry and rescale the rest so the vector stays on the
// simplex. When the remaining entries are all zero the leftover mass is
// split equally among them.
export function renormalizeProposal(values: number[], index: number, newValue: number): number[] {
  const clamped = Math.min(1, Math.max(0, newValue));
  const rest = 1 - clamped;
  const others = values.filter((_, i) => i !== index);
  const otherSum = others.reduce((a, b) => a + b, 0);
  const out = values.map((v, i) => {
    if (i === index) return clamped;
    if (otherSum === 0) return rest / (values.length - 1);
    return (v / otherSum) * rest;
  });
  return out;
}

export function proposalSum(values: number[]): number {
  return values.reduce((a, b) => a + b, 0);
}

export function updateProfile(
  panel: PanelDoc,
  group: string,
  update: Partial<Omit<ProfileDoc, "group" | "proposal">>,
): PanelDoc {
  return {
    profiles: panel.profiles.map((p) =>
      p.group === group ? { ...p, proposal: [...p.proposal], ...update } : p,
    ),
  };
}

export function updateProposal(panel: PanelDoc, group: string, index: number, value: number): PanelDoc {
  return {
    profiles: panel.profiles.map((p) =>
      p.group === group ? { ...p, proposal: renormalizeProposal(p.proposal, index, value) } : p,
    ),
  };
}

// The incident under discussion; measurements arrive as inputs, so the
// workbench ships one embedded example.
export function sampleIncident(): Record<string, unknown> {
  const third = 1 / 3;
  const triple = (a: number, b: number, c: number) => ({
    values: [a, b, c],
    weights: [third, third, third],
  });
  return {
    id: "workbench-sample",
    timestamp: "2022-04-11T09:30:00Z",
    category_inputs: {
      disc: triple(0.8, 0.2, 0.0),
      surv: triple(0.7, 0.7, 0.7),
      elec: triple(0.9, 0.5, 0.1),
      manip: triple(0.3, 0.0, 0.0),
      civic: triple(0.5, 0.5, 0.0),
      capture: triple(0.2, 0.1, 0.0),
      emerg: triple(0.0, 0.0, 0.0),
    },
    metadata: { note: "embedded workbench sample" },
  };
}

export function initialState(): WorkbenchState {
  return {
    sessionId: null,
    round: 0,
    resolved: false,
    resolutionText: null,
    t: 0.25,
    panel: defaultPanel(),
    latest: null,
    thresholds: null,
    selectedLevel: "H",
    lastError: null,
    renderedSeq: 0,
  };
}
