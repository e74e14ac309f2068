/**
 * Text projection of a view state, one line per screen element.
 *
 * Scores, levels and statuses are printed straight from the payloads the
 * gateway sent; nothing here recomputes them. The browser layer turns these
 * lines into DOM nodes, the tests assert on them directly.
 */

import type { ErrorBannerView, OnboardingView, SessionView, ViewState } from "./state.js";
import { TERMINAL_STATES } from "./state.js";
import type { ConceptRecord, ProgressDoc, Prompt } from "./types.js";
import { CHOICE_LETTERS } from "./types.js";

const PHASE_TITLES: Record<string, string> = {
  pre_test: "Pre-test",
  post_test: "Post-test",
};

function phaseTitle(phase: string): string {
  return PHASE_TITLES[phase] ?? phase;
}

/** Lines for one prompt payload, used for the transcript and current card. */
export function renderPrompt(p: Prompt): string[] {
  switch (p.kind) {
    case "question":
      return [
        p.text,
        ...p.choices.map((choice, i) => `${CHOICE_LETTERS[i] ?? i + 1}) ${choice}`),
      ];
    case "content":
      return [p.text, `(page ${p.page}/${p.pages})`];
    case "phase_result":
      return [`${phaseTitle(p.phase)}: ${p.score}/100 (${p.label})`];
    case "session_result":
      return [
        p.label === null
          ? `Lesson ${p.status}`
          : `Lesson ${p.status}: ${p.label}`,
      ];
  }
}

/** One table line per concept, in the order the payload lists them. */
export function progressRows(data: ProgressDoc): string[] {
  const row = (cid: string, rec: ConceptRecord): string => {
    const conceptual = rec.conceptual_level ?? "-";
    const objective = rec.objective_level ?? "-";
    return (
      `  ${cid}: ${rec.status}, attempts ${rec.attempts}, ` +
      `conceptual ${conceptual}, objective ${objective}`
    );
  };
  return Object.entries(data.concept_records).map(([cid, rec]) => row(cid, rec));
}

function renderOnboarding(view: OnboardingView, busy: boolean): string[] {
  const lines: string[] = ["Tell us how you like to learn"];
  if (view.items.length === 0) {
    lines.push(busy ? "Loading..." : "No profiler loaded.");
    return lines;
  }
  view.items.forEach((item, index) => {
    lines.push(`${index + 1}. ${item.prompt}`);
    item.options.forEach((option, i) => {
      const letter = CHOICE_LETTERS[i] ?? String(i + 1);
      const mark = view.selections[item.id] === option.id ? "[x]" : "[ ]";
      lines.push(`  ${mark} ${letter}) ${option.label}`);
    });
    if (view.hints.includes(item.id)) {
      lines.push(`  ! pick one answer for item ${index + 1}`);
    }
  });
  const complete =
    view.items.every((item) => view.selections[item.id] != null) && !busy;
  lines.push(complete ? "[Submit]" : "[Submit disabled]");
  return lines;
}

function renderSession(view: SessionView, busy: boolean): string[] {
  const lines: string[] = [];
  if (view.notice !== null) {
    lines.push(`* ${view.notice}`);
  }
  for (const p of view.transcript) {
    lines.push(...renderPrompt(p));
  }
  if (busy) {
    lines.push("[Waiting...]");
  } else if (TERMINAL_STATES.has(view.state)) {
    lines.push("[Back to progress]");
  } else if (view.current === null) {
    lines.push("[A] [B] [C] [D] [Next]");
  } else if (view.current.kind === "question") {
    lines.push("Answer: tap A-D");
  } else if (view.current.kind === "content") {
    lines.push("[Next]");
  }
  return lines;
}

function renderProgress(data: ProgressDoc): string[] {
  const lines: string[] = [
    `Learner ${data.learner_id}${data.name ? ` (${data.name})` : ""}`,
    `Level: ${data.learner_level ?? "-"}`,
    `Style: ${data.style}`,
    "Concepts:",
    ...progressRows(data),
  ];
  if (data.eligible_next.length > 0) {
    lines.push(`Next up: ${data.eligible_next.join(", ")}`);
    lines.push("[Start lesson]");
  } else {
    lines.push("Next up: nothing left");
  }
  return lines;
}

function renderError(view: ErrorBannerView): string[] {
  const lines = [`Error: ${view.friendly}`, `Detail: ${view.message}`];
  lines.push(view.canRetry ? "[Retry] [Dismiss]" : "[Dismiss]");
  return lines;
}

export function renderView(view: ViewState, busy = false): string[] {
  switch (view.kind) {
    case "onboarding":
      return renderOnboarding(view, busy);
    case "session":
      return renderSession(view, busy);
    case "progress":
      return renderProgress(view.data);
    case "error":
      return renderError(view);
  }
}
