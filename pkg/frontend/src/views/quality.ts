/**
 * Quality/cost sensitivity view: the +/-30% grid's daily-cost band per
 * strategy, the shared ranking when invariant, and excluded cells.
 */

import { bandChart, escapeXml } from "../charts.js";
import { STRATEGY_COLORS } from "./conversation.js";
import type { SensitivityDoc } from "../types.js";

const BAND_COLORS: Record<string, string> = {
  caching: STRATEGY_COLORS["summarize"] ?? "#2e7d32",
  sliding_window: STRATEGY_COLORS["window"] ?? "#1565c0",
  full_history: STRATEGY_COLORS["full"] ?? "#c62828",
};

export function renderQualityView(doc: SensitivityDoc): string {
  const sections = doc.scenarios
    .map((scenario) => {
      const byStrategy = new Map<string, number[]>();
      for (const cell of scenario.cells) {
        if (!cell.valid || !cell.daily_costs) continue;
        for (const [name, cost] of Object.entries(cell.daily_costs)) {
          const list = byStrategy.get(name) ?? [];
          list.push(Number(cost));
          byStrategy.set(name, list);
        }
      }
      const bands = [...byStrategy.entries()].map(([name, costs]) => ({
        name,
        lo: Math.min(...costs),
        hi: Math.max(...costs),
        color: BAND_COLORS[name] ?? "#666",
      }));
      const excluded = scenario.cells.length - scenario.valid_cells;
      const ranking = scenario.invariant
        ? `ranking across the band: <strong data-field="ranking">${scenario.ranking?.map(escapeXml).join(" &gt; ")}</strong>`
        : `<strong class="loss">ranking is NOT invariant across the grid</strong>`;
      return `
        <section>
          <h3>${escapeXml(scenario.label)}</h3>
          <p>${ranking} (${scenario.valid_cells} valid cells, ${excluded} excluded by the structural constraints)</p>
          ${bandChart(bands)}
        </section>`;
    })
    .join("");
  return `
    <div class="view" data-view="quality">
      <h2>Quality vs cost (+/-30% sensitivity)</h2>
      <p class="note">${escapeXml(doc.params_note)}: alpha ${doc.base_params.alpha}, beta ${doc.base_params.beta}, gamma ${doc.base_params.gamma}</p>
      ${sections}
    </div>`;
}

export function renderQualityBlocked(reason: string): string {
  return `
    <div class="view" data-view="quality">
      <h2>Quality vs cost (+/-30% sensitivity)</h2>
      <p class="invalid" data-field="violation">blocked: ${escapeXml(reason)}</p>
    </div>`;
}
