/**
 * Shapes of the service documents this dashboard consumes. Dollar amounts
 * arrive as exact decimal strings and are rendered verbatim; the dashboard
 * never recomputes an economic number.
 */

export interface ModelEntry {
  id: string;
  label: string;
  provider: string;
  context_window: number;
  max_output: number;
  rot_threshold: number;
  quality_multiplier: number;
}

export interface ModelsDoc {
  models: ModelEntry[];
}

export interface RoiDoc {
  cached_tokens: number;
  reuses_per_day: number;
  rates: { input_per_mtok: string; cache_write_per_mtok: string; cache_read_per_mtok: string };
  write_cost: string;
  uncached_daily: string;
  cached_daily: string;
  net_savings: string;
  savings_pct: string | null;
  break_even_reuses: number | null;
}

export interface ProjectionDoc {
  strategy: { kind: string; window?: number; ratio?: number; keep_last?: number };
  turns: number;
  growth_class: string;
  per_turn_input: number[];
  per_turn_output: number[];
  per_turn_cost: string[];
  cumulative_cost: string[];
  total_cost: string;
}

export interface SensitivityCell {
  factors: number[];
  valid: boolean;
  reason: string | null;
  ranking: string[] | null;
  daily_costs: Record<string, string> | null;
}

export interface SensitivityDoc {
  base_params: { alpha: number; beta: number; gamma: number; base_quality: number };
  params_note: string;
  all_invariant: boolean;
  scenarios: Array<{
    label: string;
    invariant: boolean;
    ranking: string[] | null;
    valid_cells: number;
    cells: SensitivityCell[];
  }>;
}

export interface SnapshotDoc {
  profile_id: string;
  context_window: number;
  turn: number;
  per_tab: Array<{ path: string; tokens: number; relevance: number | null }>;
  t_files: number;
  t_sys: number;
  t_instr: number;
  t_conv: number;
  t_out: number;
  t_total: number;
  level: string;
  warnings: string[];
  status: string;
}

export interface ErrorDoc {
  error: { code: string; message: string };
}
