/**
 * Caching ROI view: verbatim dollar figures from the service document,
 * with a cumulative-savings curve and the break-even reuse count marked.
 */

import { escapeXml, lineChart } from "../charts.js";
import type { RoiDoc } from "../types.js";

export function savingsLine(doc: RoiDoc): string {
  if (doc.savings_pct === null) return `$${doc.net_savings}/day`;
  return `$${doc.net_savings}/day (${doc.savings_pct}%)`;
}

export function renderCacheView(doc: RoiDoc): string {
  const negative = doc.net_savings.startsWith("-");
  // geometry only: a simple linear savings trajectory so the break-even
  // marker has an axis to live on; every displayed number is verbatim.
  const uncached = Number(doc.uncached_daily);
  const cached = Number(doc.cached_daily);
  const chart = lineChart(
    [
      { name: "uncached", values: [0, uncached], color: "#c62828" },
      { name: "cached", values: [0, cached], color: "#2e7d32" },
    ],
    { markerX: doc.break_even_reuses === null ? undefined : Math.min(doc.break_even_reuses / Math.max(doc.reuses_per_day, 1), 1) },
  );
  const breakEven =
    doc.break_even_reuses === null
      ? "never breaks even (reads cost at least the input rate)"
      : `${doc.break_even_reuses} reuses`;
  return `
    <div class="view" data-view="cache">
      <h2>Caching ROI</h2>
      <table>
        <tr><td>write cost</td><td>$${escapeXml(doc.write_cost)}</td></tr>
        <tr><td>uncached daily</td><td>$${escapeXml(doc.uncached_daily)}</td></tr>
        <tr><td>cached daily</td><td>$${escapeXml(doc.cached_daily)}</td></tr>
        <tr class="${negative ? "loss" : "gain"}">
          <td>${negative ? "net loss" : "net savings"}</td>
          <td data-field="savings">${escapeXml(savingsLine(doc))}</td>
        </tr>
        <tr><td>break-even</td><td data-field="break-even">${escapeXml(breakEven)}</td></tr>
      </table>
      ${chart}
    </div>`;
}
