// DOM rendering: the view is rebuilt from RoundView on every change, so the
// page always reflects the latest server state plus the pending choice.

import type { RoundView } from "./session.js";

const CHOICE_COLORS: Record<string, string> = {
  "1": "#d9534f",
  "-1": "#4a7fd4",
  "0": "#ffffff",
};

export interface UiHandles {
  root: HTMLElement;
  onChoose: (value: 1 | -1) => void;
  onStart: () => void;
}

export function mount(handles: UiHandles): (view: RoundView) => void {
  const { root } = handles;
  root.innerHTML = `
    <div class="banner" id="reconnect" hidden>connection lost, reconnecting...</div>
    <header>
      <span id="round"></span>
      <span id="score"></span>
    </header>
    <div id="countdown"></div>
    <div class="buttons">
      <button id="buy" type="button">+1</button>
      <button id="sell" type="button">&minus;1</button>
      <button id="start" type="button">start game</button>
    </div>
    <div id="result"></div>
    <div id="notice" class="notice"></div>
    <div id="skip-hint">no click before the countdown ends = skip (0)</div>
    <table id="raster" hidden></table>
    <ul id="roster"></ul>
  `;
  const el = (id: string) => root.querySelector<HTMLElement>(`#${id}`)!;
  const buy = el("buy") as HTMLButtonElement;
  const sell = el("sell") as HTMLButtonElement;
  const start = el("start") as HTMLButtonElement;
  buy.addEventListener("click", () => handles.onChoose(1));
  sell.addEventListener("click", () => handles.onChoose(-1));
  start.addEventListener("click", () => handles.onStart());

  return function render(view: RoundView): void {
    el("reconnect").hidden = !view.reconnectBanner;
    el("round").textContent =
      view.phase === "lobby"
        ? view.raster.length > 0
          ? `finished after round ${view.raster.length}`
          : "lobby"
        : `round ${view.round} / ${view.rounds}`;
    el("score").textContent = `score ${view.myScore}`;
    el("countdown").textContent =
      view.phase === "counting_down" ? view.countdownSeconds.toFixed(1) : "";

    buy.disabled = sell.disabled = !view.buttonsEnabled;
    buy.classList.toggle("active", view.activeChoice === 1);
    sell.classList.toggle("active", view.activeChoice === -1);
    start.hidden = view.phase !== "lobby";

    const result = el("result");
    if (view.outcomeSign === null) {
      result.textContent = "";
    } else {
      const sign = view.outcomeSign > 0 ? "+" : view.outcomeSign < 0 ? "-" : "0";
      const verdict = view.skipped ? "skipped" : view.won ? "won +1" : "no point";
      result.textContent = `outcome ${sign} | you ${verdict}`;
    }
    el("notice").textContent = view.notice ?? "";

    const raster = el("raster") as HTMLTableElement;
    raster.hidden = !view.showRaster;
    if (view.showRaster) {
      raster.innerHTML = "";
      for (const row of view.raster) {
        const tr = raster.insertRow();
        for (const entry of view.roster) {
          const cell = tr.insertCell();
          const choice = row.choices?.[entry.player] ?? 0;
          cell.style.background = CHOICE_COLORS[String(choice)] ?? "#ffffff";
          cell.title = `round ${row.round}: ${entry.name} -> ${choice}`;
        }
      }
    }

    const roster = el("roster");
    roster.innerHTML = "";
    for (const entry of view.roster) {
      const li = document.createElement("li");
      li.textContent = `${entry.name} (${entry.kind}) ${entry.score}`;
      roster.appendChild(li);
    }
  };
}
