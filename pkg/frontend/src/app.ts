// DOM bootstrap: wires the controller to the page. All logic lives in
// the imported modules; this file only reads inputs and paints state.

import { ApiClient } from "./api.js";
import { drawLayout } from "./canvas.js";
import { SessionController, UiState } from "./controller.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const apiBase =
  new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8000";

const canvas = el<HTMLCanvasElement>("layout-canvas");
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("canvas 2d context unavailable");

const captionInput = el<HTMLInputElement>("caption");
const languageInput = el<HTMLInputElement>("language");
const startButton = el<HTMLButtonElement>("start");
const turnInput = el<HTMLInputElement>("turn");
const sendButton = el<HTMLButtonElement>("send");
const generateButton = el<HTMLButtonElement>("generate");
const transcriptList = el<HTMLUListElement>("transcript");
const noticeBox = el<HTMLDivElement>("notice");
const errorBox = el<HTMLDivElement>("error");
const resultImage = el<HTMLImageElement>("result");
const backgroundLine = el<HTMLDivElement>("background-prompt");

function render(state: UiState): void {
  drawLayout(ctx!, state.layout, new Set(state.highlight));
  backgroundLine.textContent = state.layout ? `Background: ${state.layout.background_prompt}` : "";

  transcriptList.replaceChildren(
    ...state.transcript.map((message, i) => {
      const item = document.createElement("li");
      item.className = message.role;
      item.textContent = message.content;
      // the optimistic tail message stays dimmed until confirmed
      if (state.pending && i === state.transcript.length - 1 && message.role === "user") {
        item.classList.add("unconfirmed");
      }
      return item;
    }),
  );

  for (const button of [startButton, sendButton, generateButton]) {
    button.disabled = state.pending;
  }
  turnInput.disabled = state.pending || state.sessionId === null;

  noticeBox.textContent = state.notice ?? "";
  errorBox.textContent = state.error ?? "";
  errorBox.hidden = state.error === null;

  if (state.imageUrl && resultImage.src !== state.imageUrl) {
    resultImage.src = state.imageUrl;
    resultImage.hidden = false;
  }
}

const controller = new SessionController(new ApiClient(apiBase), render);

startButton.addEventListener("click", () => {
  void controller.startDialog(captionInput.value, languageInput.value || undefined);
});
sendButton.addEventListener("click", () => {
  void controller.sendTurn(turnInput.value).then(() => {
    if (!controller.state.error) turnInput.value = "";
  });
});
turnInput.addEventListener("keydown", (event) => {
  if (event.key === "Enter") sendButton.click();
});
generateButton.addEventListener("click", () => {
  void controller.generate();
});

render(controller.state);
