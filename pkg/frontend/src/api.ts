/** Typed client for the five tracking-service endpoints. */

import type { HistoryEntry, KitEntry, OutcomeJson, PageSummary } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`request failed with status ${status}`);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = response.status === 204 ? null : await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body?.detail ?? body);
  }
  return body as T;
}

export function listPages(): Promise<PageSummary[]> {
  return request<PageSummary[]>("/pages");
}

export function addPage(url: string, html?: string): Promise<{ id: string; outcome: OutcomeJson }> {
  return request("/pages", {
    method: "POST",
    body: JSON.stringify(html === undefined ? { url } : { url, html }),
  });
}

export function findAgain(id: string): Promise<{ outcome: OutcomeJson }> {
  return request(`/pages/${id}/extract`, { method: "POST" });
}

export function getHistory(id: string): Promise<HistoryEntry[]> {
  return request(`/pages/${id}/history`);
}

export function getKit(id: string): Promise<KitEntry[]> {
  return request(`/pages/${id}/kit`);
}
