/**
 * View state and the controller driving it.
 *
 * The screen is always exactly one of four views: the profiler form, a live
 * lesson, the progress table, or an error banner. All tutoring decisions
 * happen on the server; this layer only moves payloads between the gateway
 * and the view, one request in flight at a time.
 */

import { ApiError, Gateway } from "./api.js";
import { messageFor } from "./errors.js";
import type {
  ProfilerItem,
  ProgressDoc,
  Prompt,
  StyleProfile,
} from "./types.js";

export interface OnboardingView {
  kind: "onboarding";
  items: ProfilerItem[];
  selections: Record<string, string | null>;
  /** Item ids flagged after a blocked submit; cleared as they get answers. */
  hints: string[];
  name: string;
}

export interface SessionView {
  kind: "session";
  sessionId: string;
  current: Prompt | null;
  transcript: Prompt[];
  state: string;
  notice: string | null;
}

export interface ProgressView {
  kind: "progress";
  data: ProgressDoc;
}

export interface ErrorBannerView {
  kind: "error";
  code: string;
  /** The server's message text, verbatim. */
  message: string;
  /** The client-side mapping for the code. */
  friendly: string;
  canRetry: boolean;
}

export type ViewState =
  | OnboardingView
  | SessionView
  | ProgressView
  | ErrorBannerView;

export const TERMINAL_STATES = new Set(["completed", "skipped", "deferred"]);

export function errorBanner(
  code: string,
  message: string,
  canRetry: boolean,
): ErrorBannerView {
  return { kind: "error", code, message, friendly: messageFor(code), canRetry };
}

function emptyOnboarding(): OnboardingView {
  return { kind: "onboarding", items: [], selections: {}, hints: [], name: "" };
}

export class App {
  view: ViewState;
  busy = false;
  learnerId: string | null = null;
  profile: StyleProfile | null = null;

  private readonly gateway: Gateway;
  private lastSession: SessionView | null = null;
  private priorView: ViewState;
  private retryAction: (() => Promise<void>) | null = null;

  constructor(gateway: Gateway) {
    this.gateway = gateway;
    this.view = emptyOnboarding();
    this.priorView = this.view;
  }

  /** Load the profiler questionnaire and show the onboarding form. */
  async boot(): Promise<void> {
    await this.run(async () => {
      const doc = await this.gateway.profiler();
      const selections: Record<string, string | null> = {};
      for (const item of doc.items) {
        selections[item.id] = null;
      }
      this.view = {
        kind: "onboarding",
        items: doc.items,
        selections,
        hints: [],
        name: this.view.kind === "onboarding" ? this.view.name : "",
      };
    });
  }

  setName(name: string): void {
    if (this.view.kind === "onboarding") {
      this.view.name = name;
    }
  }

  /** Record one option for one profiler item; later taps overwrite. */
  select(itemId: string, optionId: string): void {
    if (this.view.kind !== "onboarding") {
      return;
    }
    if (!(itemId in this.view.selections)) {
      return;
    }
    this.view.selections[itemId] = optionId;
    this.view.hints = this.view.hints.filter((id) => id !== itemId);
  }

  /** Profiler items still without an answer. */
  unanswered(): string[] {
    if (this.view.kind !== "onboarding") {
      return [];
    }
    const view = this.view;
    return view.items
      .filter((item) => view.selections[item.id] == null)
      .map((item) => item.id);
  }

  canSubmit(): boolean {
    return (
      this.view.kind === "onboarding" &&
      this.view.items.length > 0 &&
      this.unanswered().length === 0 &&
      !this.busy
    );
  }

  /**
   * Submit the profiler form. With blanks left, no request is made: the
   * blank items are flagged and the form stays up.
   */
  async submitProfilerForm(): Promise<void> {
    const view = this.view;
    if (view.kind !== "onboarding" || view.items.length === 0) {
      return;
    }
    const missing = this.unanswered();
    if (missing.length > 0) {
      view.hints = missing;
      return;
    }
    await this.run(async () => {
      if (this.learnerId === null) {
        const created = await this.gateway.createLearner(view.name);
        this.learnerId = created.learner_id;
      }
      const answers = view.items.map(
        (item): [string, string] => [item.id, view.selections[item.id] as string],
      );
      this.profile = await this.gateway.submitProfiler(this.learnerId, answers);
      const data = await this.gateway.progress(this.learnerId);
      this.view = { kind: "progress", data };
    });
  }

  async showProgress(): Promise<void> {
    const learnerId = this.learnerId;
    if (learnerId === null) {
      return;
    }
    await this.run(async () => {
      const data = await this.gateway.progress(learnerId);
      this.view = { kind: "progress", data };
    });
  }

  /** Return to the lesson screen without a request, if one is in memory. */
  showSession(): void {
    if (this.lastSession !== null && !this.busy) {
      this.view = this.lastSession;
    }
  }

  async startLesson(conceptId?: string): Promise<void> {
    const learnerId = this.learnerId;
    if (learnerId === null) {
      return;
    }
    await this.run(async () => {
      try {
        const started = await this.gateway.startSession(learnerId, conceptId);
        const view: SessionView = {
          kind: "session",
          sessionId: started.session_id,
          current: started.prompt,
          transcript: [started.prompt],
          state: started.state,
          notice: null,
        };
        this.lastSession = view;
        this.view = view;
      } catch (err) {
        if (err instanceof ApiError && err.code === "ActiveSessionExists") {
          this.adoptExisting(err);
          return;
        }
        throw err;
      }
    });
  }

  /**
   * Attach to a session that already exists on the server, for example the
   * one a 409 response points at. Without a local copy of its prompts the
   * lesson screen starts blank and the next reply fills it in.
   */
  resumeSession(sessionId: string): void {
    if (this.lastSession !== null && this.lastSession.sessionId === sessionId) {
      this.lastSession.notice = "Resumed your lesson in progress.";
      this.view = this.lastSession;
      return;
    }
    const view: SessionView = {
      kind: "session",
      sessionId,
      current: null,
      transcript: [],
      state: "unknown",
      notice:
        "Resumed a lesson started elsewhere. Tap A-D if a question was on " +
        "screen, or Next to keep reading.",
    };
    this.lastSession = view;
    this.view = view;
  }

  private adoptExisting(err: ApiError): void {
    const sid = err.details["session_id"];
    if (typeof sid !== "string") {
      throw err;
    }
    this.resumeSession(sid);
  }

  /** Send one answer (0-based choice index) for the current question. */
  async answer(index: number): Promise<void> {
    const view = this.view;
    if (view.kind !== "session") {
      return;
    }
    await this.run(async () => {
      const step = await this.gateway.submitAnswer(view.sessionId, index);
      this.applyStep(view, step);
    });
  }

  /** Acknowledge the current content page. */
  async next(): Promise<void> {
    const view = this.view;
    if (view.kind !== "session") {
      return;
    }
    await this.run(async () => {
      const step = await this.gateway.submitNext(view.sessionId);
      this.applyStep(view, step);
    });
  }

  async retry(): Promise<void> {
    if (this.view.kind !== "error" || this.retryAction === null) {
      return;
    }
    const action = this.retryAction;
    this.view = this.priorView;
    await this.run(action);
  }

  dismissError(): void {
    if (this.view.kind === "error") {
      this.view = this.priorView;
      this.retryAction = null;
    }
  }

  private applyStep(
    view: SessionView,
    step: { prompts: Prompt[]; prompt: Prompt | null; state: string },
  ): void {
    for (const p of step.prompts) {
      view.transcript.push(p);
    }
    view.current = step.prompt;
    view.state = step.state;
    view.notice = TERMINAL_STATES.has(step.state) ? "Lesson finished." : null;
  }

  /** Run one gateway call; drop the call if another is still in flight. */
  private async run(action: () => Promise<void>): Promise<void> {
    if (this.busy) {
      return;
    }
    this.busy = true;
    try {
      await action();
      this.retryAction = null;
    } catch (err) {
      if (err instanceof ApiError) {
        this.showError(err, action);
      } else {
        throw err;
      }
    } finally {
      this.busy = false;
    }
  }

  private showError(err: ApiError, action: () => Promise<void>): void {
    if (this.view.kind !== "error") {
      this.priorView = this.view;
    }
    this.retryAction = action;
    const transient = err.status === 0 || err.status >= 500;
    this.view = errorBanner(err.code, err.message, transient);
  }
}
