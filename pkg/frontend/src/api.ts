/** Thin client for the local ctxbudget HTTP service. */

import type { ModelsDoc, ProjectionDoc, RoiDoc, SensitivityDoc, SnapshotDoc } from "./types.js";

export const DEFAULT_BASE = "http://127.0.0.1:8787";

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly code: string = "service_unreachable",
  ) {
    super(message);
  }
}

export class Api {
  constructor(readonly base: string = DEFAULT_BASE) {}

  private async call<T>(path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.base + path, {
        method: body === undefined ? "GET" : "POST",
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ServiceError(`service unreachable at ${this.base}: ${String(err)}`);
    }
    const text = await response.text();
    if (!response.ok) {
      try {
        const doc = JSON.parse(text) as { error?: { code?: string; message?: string } };
        throw new ServiceError(doc.error?.message ?? text, doc.error?.code ?? "error");
      } catch (err) {
        if (err instanceof ServiceError) throw err;
        throw new ServiceError(`${response.status}: ${text}`);
      }
    }
    return JSON.parse(text) as T;
  }

  models(): Promise<ModelsDoc> {
    return this.call<ModelsDoc>("/models");
  }

  cacheRoi(body: { tokens: number; reuses: number; model: string }): Promise<RoiDoc> {
    return this.call<RoiDoc>("/cache-roi", body);
  }

  conversation(body: {
    model: string;
    system_tokens: number;
    user_tokens: number;
    assistant_tokens: number;
    turns: number;
    strategy: { kind: string; window?: number; ratio?: number; keep_last?: number };
  }): Promise<ProjectionDoc> {
    return this.call<ProjectionDoc>("/conversation", body);
  }

  sensitivity(body: {
    model: string;
    alpha: number;
    beta: number;
    gamma: number;
  }): Promise<SensitivityDoc> {
    return this.call<SensitivityDoc>("/quality", { ...body, mode: "sensitivity" });
  }

  budget(body: {
    model: string;
    turn: number;
    instruction_files: number;
    tabs: Array<{ path: string; tokens: number; active?: boolean; language?: string }>;
  }): Promise<SnapshotDoc> {
    return this.call<SnapshotDoc>("/budget", body);
  }
}
