/**
 * Scenario state shared by the views, plus client-side enforcement of the
 * parameter invariants so invalid slider positions are flagged and never
 * submitted.
 */

export interface ScenarioState {
  modelId: string;
  cache: { tokens: number; reuses: number };
  conversation: {
    system: number;
    user: number;
    assistant: number;
    turns: number;
    window: number;
    ratio: number;
    keepLast: number;
  };
  quality: { alpha: number; beta: number; gamma: number };
}

export function defaultState(): ScenarioState {
  return {
    modelId: "claude-sonnet-4-5",
    cache: { tokens: 50_000, reuses: 100 },
    conversation: { system: 2000, user: 500, assistant: 1500, turns: 40, window: 5, ratio: 0.2, keepLast: 1 },
    quality: { alpha: 0.3, beta: 0.35, gamma: 0.2 },
  };
}

/** Returns a human-readable violation, or null when submittable. */
export function qualityParamViolation(q: { alpha: number; beta: number; gamma: number }): string | null {
  if (q.alpha <= 0 || q.beta <= 0 || q.gamma <= 0) {
    return "alpha, beta, gamma must be positive";
  }
  if (q.alpha + q.beta + q.gamma >= 1) {
    return `alpha + beta + gamma = ${(q.alpha + q.beta + q.gamma).toFixed(2)} must stay below 1`;
  }
  if (q.alpha >= q.beta) {
    return "alpha must stay below beta";
  }
  return null;
}

export function cacheParamViolation(c: { tokens: number; reuses: number }): string | null {
  if (!Number.isFinite(c.tokens) || c.tokens <= 0) return "cached tokens must be positive";
  if (!Number.isFinite(c.reuses) || c.reuses < 0) return "reuses must be >= 0";
  return null;
}

export function conversationParamViolation(c: {
  system: number;
  user: number;
  assistant: number;
  turns: number;
  window: number;
  ratio: number;
  keepLast: number;
}): string | null {
  if (c.system < 0 || c.user < 0 || c.assistant < 0) return "token counts must be >= 0";
  if (c.turns < 1) return "turns must be >= 1";
  if (c.window < 1) return "window must be >= 1";
  if (c.ratio < 0 || c.ratio > 1) return "ratio must be in [0, 1]";
  if (c.keepLast < 0) return "keep-last must be >= 0";
  return null;
}
