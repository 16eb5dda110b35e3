/**
 * Dashboard wiring: one debounced requester per view, slider state in one
 * place, inline error states when the service is unreachable. Service
 * base address comes from the ?service= query parameter or the address
 * box; nothing else is configurable.
 */

import { Api, DEFAULT_BASE, ServiceError } from "./api.js";
import { ViewRequester } from "./requests.js";
import {
  cacheParamViolation,
  conversationParamViolation,
  defaultState,
  qualityParamViolation,
  type ScenarioState,
} from "./state.js";
import type { ProjectionDoc } from "./types.js";
import { renderBudgetView, renderErrorState } from "./views/budget.js";
import { renderCacheView } from "./views/cache.js";
import { renderConversationView } from "./views/conversation.js";
import { renderQualityBlocked, renderQualityView } from "./views/quality.js";

const state: ScenarioState = defaultState();
let logScale = false;

function element(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function serviceBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("service");
  const box = document.getElementById("service-base") as HTMLInputElement | null;
  return fromQuery ?? box?.value ?? DEFAULT_BASE;
}

function errorText(err: unknown): string {
  return err instanceof ServiceError ? err.message : String(err);
}

function setup(): void {
  const api = () => new Api(serviceBase());

  const cacheRequester = new ViewRequester({
    fetcher: (body: { tokens: number; reuses: number; model: string }) => api().cacheRoi(body),
    onResult: (doc) => {
      element("cache-view").innerHTML = renderCacheView(doc);
    },
    onError: (err) => {
      element("cache-view").innerHTML = renderErrorState("Caching ROI", errorText(err));
    },
  });

  const conversationRequester = new ViewRequester({
    fetcher: async (body: ScenarioState["conversation"] & { model: string }) => {
      const strategies = [
        { kind: "full" },
        { kind: "window", window: body.window },
        { kind: "summarize", ratio: body.ratio, keep_last: body.keepLast },
      ];
      const docs: ProjectionDoc[] = [];
      for (const strategy of strategies) {
        docs.push(
          await api().conversation({
            model: body.model,
            system_tokens: body.system,
            user_tokens: body.user,
            assistant_tokens: body.assistant,
            turns: body.turns,
            strategy,
          }),
        );
      }
      return docs;
    },
    onResult: (docs) => {
      element("conversation-view").innerHTML = renderConversationView(docs, logScale);
      const toggle = document.querySelector('[data-action="log-toggle"]');
      toggle?.addEventListener("change", (event) => {
        logScale = (event.target as HTMLInputElement).checked;
        refreshConversation();
      });
    },
    onError: (err) => {
      element("conversation-view").innerHTML = renderErrorState("Conversation strategies", errorText(err));
    },
  });

  const qualityRequester = new ViewRequester({
    fetcher: (body: { model: string; alpha: number; beta: number; gamma: number }) =>
      api().sensitivity(body),
    onResult: (doc) => {
      element("quality-view").innerHTML = renderQualityView(doc);
    },
    onError: (err) => {
      element("quality-view").innerHTML = renderErrorState("Quality vs cost", errorText(err));
    },
  });

  const budgetRequester = new ViewRequester({
    fetcher: (body: { model: string }) =>
      api().budget({
        model: body.model,
        turn: 3,
        instruction_files: 2,
        tabs: [
          { path: "src/app/main.ts", tokens: 42_000, active: true, language: "typescript" },
          { path: "src/app/api.ts", tokens: 18_000, language: "typescript" },
          { path: "package-lock.json", tokens: 25_200, language: "json" },
        ],
      }),
    onResult: (doc) => {
      element("budget-view").innerHTML = renderBudgetView(doc);
    },
    onError: (err) => {
      element("budget-view").innerHTML = renderErrorState("Budget snapshot", errorText(err));
    },
  });

  const refreshCache = (immediate = false) => {
    const violation = cacheParamViolation(state.cache);
    if (violation) {
      element("cache-view").innerHTML = renderErrorState("Caching ROI", `blocked: ${violation}`);
      return;
    }
    const body = { ...state.cache, model: state.modelId };
    immediate ? cacheRequester.fire(body) : cacheRequester.request(body);
  };
  const refreshConversation = (immediate = false) => {
    const violation = conversationParamViolation(state.conversation);
    if (violation) {
      element("conversation-view").innerHTML = renderErrorState("Conversation strategies", `blocked: ${violation}`);
      return;
    }
    const body = { ...state.conversation, model: state.modelId };
    immediate ? conversationRequester.fire(body) : conversationRequester.request(body);
  };
  const refreshQuality = (immediate = false) => {
    const violation = qualityParamViolation(state.quality);
    flagQualitySliders(violation);
    if (violation) {
      element("quality-view").innerHTML = renderQualityBlocked(violation);
      return;
    }
    const body = { ...state.quality, model: state.modelId };
    immediate ? qualityRequester.fire(body) : qualityRequester.request(body);
  };
  const refreshBudget = (immediate = false) => {
    const body = { model: state.modelId };
    immediate ? budgetRequester.fire(body) : budgetRequester.request(body);
  };
  const refreshAll = (immediate = false) => {
    refreshCache(immediate);
    refreshConversation(immediate);
    refreshQuality(immediate);
    refreshBudget(immediate);
  };

  function flagQualitySliders(violation: string | null): void {
    element("quality-controls").classList.toggle("invalid", violation !== null);
    element("quality-violation").textContent = violation ?? "";
  }

  function bindNumber(id: string, apply: (value: number) => void, refresh: () => void): void {
    const input = element(id) as HTMLInputElement;
    input.addEventListener("input", () => {
      apply(Number(input.value));
      const label = document.querySelector(`[data-value-for="${id}"]`);
      if (label) label.textContent = input.value;
      refresh();
    });
  }

  bindNumber("cache-tokens", (v) => (state.cache.tokens = v), refreshCache);
  bindNumber("cache-reuses", (v) => (state.cache.reuses = v), refreshCache);
  bindNumber("conv-system", (v) => (state.conversation.system = v), refreshConversation);
  bindNumber("conv-user", (v) => (state.conversation.user = v), refreshConversation);
  bindNumber("conv-assistant", (v) => (state.conversation.assistant = v), refreshConversation);
  bindNumber("conv-turns", (v) => (state.conversation.turns = v), refreshConversation);
  bindNumber("conv-window", (v) => (state.conversation.window = v), refreshConversation);
  bindNumber("conv-ratio", (v) => (state.conversation.ratio = v), refreshConversation);
  bindNumber("quality-alpha", (v) => (state.quality.alpha = v), refreshQuality);
  bindNumber("quality-beta", (v) => (state.quality.beta = v), refreshQuality);
  bindNumber("quality-gamma", (v) => (state.quality.gamma = v), refreshQuality);

  const modelSelect = element("model-select") as HTMLSelectElement;
  modelSelect.addEventListener("change", () => {
    state.modelId = modelSelect.value;
    refreshAll();
  });
  element("service-base").addEventListener("change", () => refreshAll(true));

  api()
    .models()
    .then((doc) => {
      modelSelect.innerHTML = doc.models
        .map(
          (m) =>
            `<option value="${m.id}" ${m.id === state.modelId ? "selected" : ""}>${m.label} (${m.provider})</option>`,
        )
        .join("");
      refreshAll(true);
    })
    .catch((err) => {
      for (const id of ["cache-view", "conversation-view", "quality-view", "budget-view"]) {
        element(id).innerHTML = renderErrorState(id.replace("-view", ""), errorText(err));
      }
    });
}

document.addEventListener("DOMContentLoaded", setup);
