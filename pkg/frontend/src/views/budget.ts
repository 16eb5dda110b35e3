/**
 * Budget snapshot view: the five-component bar with low/medium/high
 * coloring and the 60%/85% boundary guides; status string verbatim.
 */

import { budgetBar, escapeXml } from "../charts.js";
import type { SnapshotDoc } from "../types.js";

export function renderBudgetView(doc: SnapshotDoc): string {
  const segments = [
    { name: "files", tokens: doc.t_files },
    { name: "system", tokens: doc.t_sys },
    { name: "instructions", tokens: doc.t_instr },
    { name: "conversation", tokens: doc.t_conv },
    { name: "output reserve", tokens: doc.t_out },
  ];
  const warnings = doc.warnings.map((w) => `<li class="loss">${escapeXml(w)}</li>`).join("");
  return `
    <div class="view" data-view="budget">
      <h2>Budget snapshot</h2>
      <p><code data-field="status">${escapeXml(doc.status)}</code> <span class="level level-${escapeXml(doc.level)}" data-field="level">${escapeXml(doc.level)}</span></p>
      ${budgetBar(segments, doc.context_window, doc.level)}
      <table>
        ${segments.map((s) => `<tr><td>${s.name}</td><td>${s.tokens.toLocaleString("en-US")}</td></tr>`).join("")}
        <tr><th>total</th><th>${doc.t_total.toLocaleString("en-US")}</th></tr>
      </table>
      ${warnings ? `<ul>${warnings}</ul>` : ""}
    </div>`;
}

export function renderErrorState(viewName: string, message: string): string {
  return `
    <div class="view view-error" data-view="${escapeXml(viewName)}">
      <h2>${escapeXml(viewName)}</h2>
      <p class="loss" data-field="error">${escapeXml(message)}</p>
    </div>`;
}
