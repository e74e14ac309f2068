/**
 * Thin fetch wrapper over the gateway HTTP API.
 *
 * Every non-2xx response becomes an ApiError carrying the server's code and
 * message verbatim; transport failures become code "NetworkError".
 */

import { NETWORK_ERROR_CODE } from "./errors.js";
import type {
  CourseDoc,
  ErrorCodesDoc,
  ProfilerDoc,
  ProgressDoc,
  SessionStarted,
  SessionStep,
  StyleProfile,
} from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly details: Record<string, unknown>;

  constructor(
    code: string,
    message: string,
    status: number,
    details?: Record<string, unknown>,
  ) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
    this.details = details ?? {};
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

/** The surface the app layer depends on; fakes implement this in tests. */
export interface Gateway {
  health(): Promise<{ status: string }>;
  errorCodes(): Promise<ErrorCodesDoc>;
  course(): Promise<CourseDoc>;
  profiler(): Promise<ProfilerDoc>;
  createLearner(name: string): Promise<{ learner_id: string }>;
  submitProfiler(
    learnerId: string,
    answers: [string, string][],
  ): Promise<StyleProfile>;
  progress(learnerId: string): Promise<ProgressDoc>;
  startSession(learnerId: string, conceptId?: string): Promise<SessionStarted>;
  submitAnswer(sessionId: string, answer: number): Promise<SessionStep>;
  submitNext(sessionId: string): Promise<SessionStep>;
}

export class GatewayClient implements Gateway {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    // Bind so the implementation works whether fetch is global or injected.
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(NETWORK_ERROR_CODE, String(err), 0);
    }
    let doc: unknown = null;
    try {
      doc = await response.json();
    } catch {
      doc = null;
    }
    if (!response.ok) {
      const rec = (doc ?? {}) as Record<string, unknown>;
      const code =
        typeof rec.code === "string" ? rec.code : NETWORK_ERROR_CODE;
      const message =
        typeof rec.message === "string"
          ? rec.message
          : `request failed with status ${response.status}`;
      const details =
        rec.details && typeof rec.details === "object"
          ? (rec.details as Record<string, unknown>)
          : undefined;
      throw new ApiError(code, message, response.status, details);
    }
    return doc as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  errorCodes(): Promise<ErrorCodesDoc> {
    return this.request("GET", "/meta/error-codes");
  }

  course(): Promise<CourseDoc> {
    return this.request("GET", "/course");
  }

  profiler(): Promise<ProfilerDoc> {
    return this.request("GET", "/profiler");
  }

  createLearner(name: string): Promise<{ learner_id: string }> {
    return this.request("POST", "/learners", { name });
  }

  submitProfiler(
    learnerId: string,
    answers: [string, string][],
  ): Promise<StyleProfile> {
    return this.request(
      "POST",
      `/learners/${encodeURIComponent(learnerId)}/profiler`,
      { answers },
    );
  }

  progress(learnerId: string): Promise<ProgressDoc> {
    return this.request(
      "GET",
      `/learners/${encodeURIComponent(learnerId)}/progress`,
    );
  }

  startSession(
    learnerId: string,
    conceptId?: string,
  ): Promise<SessionStarted> {
    const body: Record<string, unknown> = { learner_id: learnerId };
    if (conceptId !== undefined) {
      body.concept_id = conceptId;
    }
    return this.request("POST", "/sessions", body);
  }

  submitAnswer(sessionId: string, answer: number): Promise<SessionStep> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/input`,
      { answer },
    );
  }

  submitNext(sessionId: string): Promise<SessionStep> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/input`,
      { next: true },
    );
  }
}
