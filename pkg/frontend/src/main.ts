/**
 * Browser bootstrap: renders the current view into #app and wires the
 * controls. One request at a time; every button disables while one runs.
 */

import { GatewayClient } from "./api.js";
import { App, TERMINAL_STATES } from "./state.js";
import { progressRows, renderPrompt } from "./render.js";
import { CHOICE_LETTERS } from "./types.js";

const apiBase =
  new URLSearchParams(window.location.search).get("api") ??
  "http://127.0.0.1:8000";
const app = new App(new GatewayClient(apiBase));
const root = document.getElementById("app") as HTMLElement;

function el(
  tag: string,
  className: string,
  text?: string,
): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function button(
  label: string,
  className: string,
  onTap: () => void | Promise<void>,
): HTMLButtonElement {
  const node = document.createElement("button");
  node.className = className;
  node.textContent = label;
  node.disabled = app.busy;
  node.onclick = () => {
    const result = onTap();
    if (result instanceof Promise) {
      draw();
      void result.finally(draw);
    } else {
      draw();
    }
  };
  return node;
}

function drawOnboarding(): void {
  if (app.view.kind !== "onboarding") {
    return;
  }
  const view = app.view;
  root.appendChild(el("h1", "title", "Tell us how you like to learn"));
  const nameRow = el("div", "name-row");
  const nameInput = document.createElement("input");
  nameInput.placeholder = "Your name (optional)";
  nameInput.value = view.name;
  nameInput.oninput = () => app.setName(nameInput.value);
  nameRow.appendChild(nameInput);
  root.appendChild(nameRow);
  view.items.forEach((item, index) => {
    const card = el("div", "card");
    card.appendChild(el("p", "prompt", `${index + 1}. ${item.prompt}`));
    item.options.forEach((option, i) => {
      const letter = CHOICE_LETTERS[i] ?? String(i + 1);
      const selected = view.selections[item.id] === option.id;
      card.appendChild(
        button(
          `${letter}) ${option.label}`,
          selected ? "choice selected" : "choice",
          () => app.select(item.id, option.id),
        ),
      );
    });
    if (view.hints.includes(item.id)) {
      card.appendChild(el("p", "hint", "Pick one answer here."));
    }
    root.appendChild(card);
  });
  const submit = button("Submit", "primary", () => app.submitProfilerForm());
  submit.disabled = !app.canSubmit();
  root.appendChild(submit);
}

function drawSession(): void {
  if (app.view.kind !== "session") {
    return;
  }
  const view = app.view;
  if (view.notice !== null) {
    root.appendChild(el("p", "notice", view.notice));
  }
  for (const p of view.transcript) {
    const card = el("div", `card ${p.kind}`);
    for (const line of renderPrompt(p)) {
      card.appendChild(el("p", "line", line));
    }
    root.appendChild(card);
  }
  const controls = el("div", "controls");
  const current = view.current;
  if (TERMINAL_STATES.has(view.state)) {
    controls.appendChild(
      button("Back to progress", "primary", () => app.showProgress()),
    );
  } else if (current === null || current.kind === "question") {
    const count = current === null ? 4 : current.choices.length;
    for (let i = 0; i < count; i += 1) {
      controls.appendChild(
        button(CHOICE_LETTERS[i] ?? String(i + 1), "answer", () =>
          app.answer(i),
        ),
      );
    }
    if (current === null) {
      controls.appendChild(button("Next", "answer", () => app.next()));
    }
  } else if (current.kind === "content") {
    controls.appendChild(button("Next", "primary", () => app.next()));
  }
  root.appendChild(controls);
}

function drawProgress(): void {
  if (app.view.kind !== "progress") {
    return;
  }
  const data = app.view.data;
  root.appendChild(
    el("h1", "title", `Learner ${data.learner_id}${data.name ? ` (${data.name})` : ""}`),
  );
  root.appendChild(el("p", "line", `Level: ${data.learner_level ?? "-"}`));
  root.appendChild(el("p", "line", `Style: ${data.style}`));
  const table = el("div", "card");
  for (const row of progressRows(data)) {
    table.appendChild(el("p", "line", row.trim()));
  }
  root.appendChild(table);
  if (data.eligible_next.length > 0) {
    root.appendChild(
      el("p", "line", `Next up: ${data.eligible_next.join(", ")}`),
    );
    root.appendChild(
      button("Start lesson", "primary", () => app.startLesson()),
    );
  } else {
    root.appendChild(el("p", "line", "Next up: nothing left"));
  }
}

function drawError(): void {
  if (app.view.kind !== "error") {
    return;
  }
  const view = app.view;
  const banner = el("div", "banner");
  banner.appendChild(el("p", "line", `Error: ${view.friendly}`));
  banner.appendChild(el("p", "detail", `Detail: ${view.message}`));
  if (view.canRetry) {
    banner.appendChild(button("Retry", "primary", () => app.retry()));
  }
  banner.appendChild(button("Dismiss", "secondary", () => app.dismissError()));
  root.appendChild(banner);
}

function drawTabs(): void {
  if (app.learnerId === null || app.view.kind === "onboarding") {
    return;
  }
  const tabs = el("div", "tabs");
  const lesson = button("Lesson", "tab", () => app.showSession());
  const progress = button("Progress", "tab", () => app.showProgress());
  if (app.view.kind === "session") {
    lesson.classList.add("active");
  }
  if (app.view.kind === "progress") {
    progress.classList.add("active");
  }
  tabs.appendChild(lesson);
  tabs.appendChild(progress);
  root.appendChild(tabs);
}

function draw(): void {
  root.textContent = "";
  drawTabs();
  switch (app.view.kind) {
    case "onboarding":
      drawOnboarding();
      break;
    case "session":
      drawSession();
      break;
    case "progress":
      drawProgress();
      break;
    case "error":
      drawError();
      break;
  }
}

void app.boot().finally(draw);
draw();
