// Entry point: wire the session reducer, the websocket, and the DOM.
// Room id and display name come from the query string:
//   index.html?room=<id>&name=<display>&server=ws://host:port

import type { ServerMessage } from "./protocol.js";
import {
  applyServerMessage,
  createSession,
  renderRound,
  setConnected,
  submitChoice,
  type ClientSession,
} from "./session.js";
import { mount } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const room = params.get("room") ?? "";
const name = params.get("name") ?? `player-${Math.floor(Math.random() * 1e6)}`;
const server =
  params.get("server") ??
  `${window.location.protocol === "https:" ? "wss" : "ws"}://${window.location.host}`;

if (!room) {
  document.body.textContent = "missing ?room=<id> in the URL";
  throw new Error("missing room id");
}

let session: ClientSession = createSession(room, name);
let socket: WebSocket | null = null;

const nowSeconds = () => Date.now() / 1000;

const render = mount({
  root: document.getElementById("app")!,
  onChoose(value) {
    const result = submitChoice(session, value);
    session = result.session;
    if (result.send && socket?.readyState === WebSocket.OPEN) {
      socket.send(JSON.stringify(result.send));
    }
    paint();
  },
  onStart() {
    socket?.send(JSON.stringify({ type: "start", room, player: name }));
  },
});

function paint(): void {
  render(renderRound(session, nowSeconds()));
}

function connect(): void {
  socket = new WebSocket(`${server}/ws`);
  socket.addEventListener("open", () => {
    session = setConnected(session, true);
    socket!.send(JSON.stringify({ type: "join", room, player: name, name }));
    paint();
  });
  socket.addEventListener("message", (event) => {
    const message = JSON.parse(String(event.data)) as ServerMessage;
    session = applyServerMessage(session, message, nowSeconds());
    paint();
  });
  socket.addEventListener("close", () => {
    session = setConnected(session, false);
    paint();
    setTimeout(connect, 1000);
  });
}

connect();
setInterval(paint, 100); // keep the countdown ticking between messages
