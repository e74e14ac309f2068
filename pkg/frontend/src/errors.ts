/**
 * User-facing messages for every error code the gateway can return.
 *
 * The e2e suite cross-checks this map against GET /meta/error-codes, so a
 * new server code without an entry here fails the build, not the user.
 */

export const ERROR_MESSAGES: Record<string, string> = {
  ActiveSessionExists: "You already have a lesson in progress.",
  AlreadyAnswered: "That question was already answered.",
  ChoiceOutOfRange: "Pick one of the answers shown on screen.",
  ConceptNotEligible: "That concept is locked until its prerequisites are done.",
  CorruptLog: "Your saved history is damaged; contact support.",
  DuplicateAnswer: "You answered one of the profiler items twice.",
  DuplicateSegment: "A message part arrived twice; please resend.",
  EmptyPayload: "The message was empty.",
  EmptyPhase: "This test has no questions; the course setup is broken.",
  InconsistentTotal: "Message parts disagree about how many there are.",
  InsufficientQuestions: "The question bank is too small for this test.",
  IoFailure: "The server could not read or write its data.",
  LengthMismatch: "The answer sheet does not match the question count.",
  MissingSegment: "Part of the message never arrived; please resend.",
  NoActivePhase: "There is no test running right now.",
  NonPrintable: "The text contains characters that cannot be sent.",
  OutOfRange: "A number in the request is outside the allowed range.",
  ParseError: "The server could not read the request.",
  ReplayMismatch: "Your saved history does not add up; contact support.",
  SequenceConflict: "Another device changed your data; reload and retry.",
  SessionTerminal: "This lesson is already finished.",
  TooLong: "The text is too long to send.",
  UnknownConcept: "No such concept in this course.",
  UnknownItem: "The profiler answers mention an unknown item.",
  UnknownLearner: "No learner with that id; sign up first.",
  UnknownOption: "The profiler answers mention an unknown option.",
  UnknownSession: "That lesson no longer exists; start a new one.",
  ValidationError: "The request was rejected as invalid.",
  WrongInputKind: "That input does not fit the current step.",
};

/** Client-side code for fetch failures; never sent by the server. */
export const NETWORK_ERROR_CODE = "NetworkError";

ERROR_MESSAGES[NETWORK_ERROR_CODE] =
  "Could not reach the tutor. Check your connection and retry.";

/** Map a code to its message, with a readable fallback for unknown codes. */
export function messageFor(code: string): string {
  const known = ERROR_MESSAGES[code];
  return known !== undefined ? known : `Something went wrong (${code}).`;
}
