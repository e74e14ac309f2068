/**
 * Wire types for the tutoring gateway HTTP API.
 *
 * These mirror the JSON the server sends; the client never computes scores
 * or levels itself, it only carries these payloads to the screen.
 */

export interface QuestionPrompt {
  kind: "question";
  question_id: string;
  text: string;
  choices: string[];
}

export interface ContentPrompt {
  kind: "content";
  text: string;
  page: number;
  pages: number;
}

export interface PhaseResultPrompt {
  kind: "phase_result";
  phase: string;
  score: number;
  level: string;
  label: string;
}

export interface SessionResultPrompt {
  kind: "session_result";
  status: string;
  level: string | null;
  label: string | null;
}

export type Prompt =
  | QuestionPrompt
  | ContentPrompt
  | PhaseResultPrompt
  | SessionResultPrompt;

export interface SessionStarted {
  session_id: string;
  prompt: Prompt;
  state: string;
}

export interface SessionStep {
  session_id: string;
  prompts: Prompt[];
  prompt: Prompt | null;
  state: string;
}

export interface ProfilerOption {
  id: string;
  label: string;
}

export interface ProfilerItem {
  id: string;
  prompt: string;
  options: ProfilerOption[];
}

export interface ProfilerDoc {
  items: ProfilerItem[];
}

export interface StyleProfile {
  weights: Record<string, number>;
  dominant: string;
}

export interface ConceptRecord {
  status: string;
  attempts: number;
  conceptual_level: string | null;
  objective_level: string | null;
}

export interface ProgressDoc {
  learner_id: string;
  name: string;
  learner_level: string | null;
  style: string;
  concept_records: Record<string, ConceptRecord>;
  eligible_next: string[];
}

export interface CourseSection {
  id: string;
  title: string;
}

export interface CourseConcept {
  id: string;
  title: string;
  prerequisites: string[];
  sections: CourseSection[];
}

export interface CourseDoc {
  concepts: CourseConcept[];
}

export interface ErrorCodesDoc {
  codes: string[];
}

/** Answer letters shown on the four tap targets. */
export const CHOICE_LETTERS = ["A", "B", "C", "D"] as const;
