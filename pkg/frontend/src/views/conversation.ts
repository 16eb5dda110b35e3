/**
 * Conversation cost view: the three strategies' cumulative cost
 * trajectories overlaid, quadratic vs linear visibly divergent. Curve
 * geometry comes from the documents' cost arrays; the headline figures
 * are the verbatim strings.
 */

import { escapeXml, lineChart } from "../charts.js";
import type { ProjectionDoc } from "../types.js";

export const STRATEGY_COLORS: Record<string, string> = {
  full: "#c62828",
  window: "#1565c0",
  summarize: "#2e7d32",
};

export function renderConversationView(docs: ProjectionDoc[], logScale = false): string {
  const series = docs.map((doc) => ({
    name: `${doc.strategy.kind} (${doc.growth_class})`,
    values: doc.cumulative_cost.map(Number),
    color: STRATEGY_COLORS[doc.strategy.kind] ?? "#666",
  }));
  const totals = docs
    .map(
      (doc) =>
        `<tr><td>${escapeXml(doc.strategy.kind)}</td><td>${escapeXml(doc.growth_class)}</td>` +
        `<td data-field="total-${escapeXml(doc.strategy.kind)}">$${escapeXml(doc.total_cost)}</td></tr>`,
    )
    .join("");
  return `
    <div class="view" data-view="conversation">
      <h2>Conversation strategies</h2>
      <table>
        <tr><th>strategy</th><th>growth</th><th>total over ${docs[0]?.turns ?? 0} turns</th></tr>
        ${totals}
      </table>
      ${lineChart(series, { logScale })}
      <label><input type="checkbox" data-action="log-toggle" ${logScale ? "checked" : ""}/> log cost axis</label>
    </div>`;
}
