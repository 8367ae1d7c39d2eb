// Client session state: a pure reduction of the server message stream plus
// the one pending optimistic choice. Replaying a transcript reconstructs the
// exact same session; nothing is settled on the client.

import type {
  Choice,
  ClientMessage,
  RosterEntry,
  RoundResultMessage,
  ServerMessage,
} from "./protocol.js";

export interface RoundRow {
  round: number;
  outcome: number;
  winners: string[];
  myChoice: Choice;
  myDelta: number;
  choices: Record<string, Choice> | null; // per-player, only under full visibility
}

export interface ClientSession {
  room: string;
  player: string;
  connected: boolean;
  phase: "lobby" | "counting_down" | "settling";
  round: number;
  rounds: number;
  deadline: number | null; // server clock, epoch seconds
  clockOffset: number | null; // serverTime - clientTime, single estimate
  visibility: "own" | "full";
  roster: RosterEntry[];
  myChoice: Choice | null; // acknowledged by the server this round
  pendingChoice: Choice | null; // sent, awaiting acknowledgement
  history: RoundRow[]; // one row per completed round
  lastResult: RoundResultMessage | null;
  notice: string | null;
}

export function createSession(room: string, player: string): ClientSession {
  return {
    room,
    player,
    connected: false,
    phase: "lobby",
    round: 0,
    rounds: 0,
    deadline: null,
    clockOffset: null,
    visibility: "own",
    roster: [],
    myChoice: null,
    pendingChoice: null,
    history: [],
    lastResult: null,
    notice: null,
  };
}

function withOffset(
  session: ClientSession,
  serverTime: number | null | undefined,
  nowClient: number,
): ClientSession {
  if (session.clockOffset !== null || serverTime == null) return session;
  return { ...session, clockOffset: serverTime - nowClient };
}

function applyScores(roster: RosterEntry[], scores: Record<string, number>): RosterEntry[] {
  return roster.map((entry) =>
    scores[entry.player] === undefined ? entry : { ...entry, score: scores[entry.player]! },
  );
}

/** Fold one server message into the session. Pure: returns a new session. */
export function applyServerMessage(
  session: ClientSession,
  message: ServerMessage,
  nowClient: number,
): ClientSession {
  switch (message.type) {
    case "state": {
      let next = withOffset(session, message.server_time, nowClient);
      next = {
        ...next,
        phase: message.phase,
        round: message.round,
        rounds: message.rounds,
        deadline: message.deadline,
        visibility: message.visibility,
        roster: message.roster,
      };
      if (message.your_choice !== undefined) {
        // Acknowledgement of our choose: the optimistic value is confirmed.
        next = { ...next, myChoice: message.your_choice, pendingChoice: null };
      }
      return next;
    }
    case "round_start": {
      let next = withOffset(session, message.server_time, nowClient);
      return {
        ...next,
        phase: "counting_down",
        round: message.round,
        deadline: message.deadline,
        roster: message.roster,
        myChoice: null,
        pendingChoice: null,
        notice: null,
      };
    }
    case "round_result": {
      const mine =
        message.choices?.[session.player] ??
        session.myChoice ??
        session.pendingChoice ??
        0;
      const row: RoundRow = {
        round: message.round,
        outcome: message.outcome,
        winners: message.winners,
        myChoice: mine,
        myDelta: message.points[session.player] ?? 0,
        choices: message.choices ?? null,
      };
      return {
        ...session,
        phase: "settling",
        deadline: null,
        roster: applyScores(session.roster, message.scores),
        history: [...session.history, row],
        lastResult: message,
        myChoice: null,
        pendingChoice: null,
      };
    }
    case "error": {
      if (message.code === "not_counting_down") {
        // Rejected (too early / too late): drop the optimistic highlight.
        return { ...session, pendingChoice: null, notice: message.detail };
      }
      return { ...session, notice: message.detail };
    }
  }
}

export function setConnected(session: ClientSession, connected: boolean): ClientSession {
  return { ...session, connected };
}

/** Replay a transcript from scratch; the UI state is a function of it. */
export function replayTranscript(
  room: string,
  player: string,
  transcript: Array<{ message: ServerMessage; at: number }>,
): ClientSession {
  let session = setConnected(createSession(room, player), true);
  for (const entry of transcript) {
    session = applyServerMessage(session, entry.message, entry.at);
  }
  return session;
}

export interface SubmitResult {
  session: ClientSession;
  send: ClientMessage | null;
}

/** Optimistically register a choice; only valid while counting down. */
export function submitChoice(session: ClientSession, value: 1 | -1): SubmitResult {
  if (session.phase !== "counting_down" || !session.connected) {
    return { session, send: null };
  }
  return {
    session: { ...session, pendingChoice: value },
    send: { type: "choose", room: session.room, player: session.player, value },
  };
}

export interface RoundView {
  phase: ClientSession["phase"];
  round: number;
  rounds: number;
  countdownSeconds: number; // never negative
  buttonsEnabled: boolean;
  activeChoice: Choice | null; // pending beats acknowledged
  myScore: number;
  roster: RosterEntry[];
  outcomeSign: -1 | 0 | 1 | null;
  won: boolean | null;
  skipped: boolean | null;
  lastDelta: number | null;
  raster: RoundRow[]; // rows == completed rounds received
  showRaster: boolean;
  reconnectBanner: boolean;
  notice: string | null;
}

/** Project the session onto view state for the given client clock reading. */
export function renderRound(session: ClientSession, nowClient: number): RoundView {
  const offset = session.clockOffset ?? 0;
  const serverNow = nowClient + offset;
  const remaining =
    session.deadline === null ? 0 : Math.max(0, session.deadline - serverNow);
  const stale = session.deadline !== null && serverNow >= session.deadline;
  const me = session.roster.find((p) => p.player === session.player);
  const result = session.lastResult;
  const lastRow = session.history[session.history.length - 1];
  return {
    phase: session.phase,
    round: session.round,
    rounds: session.rounds,
    countdownSeconds: remaining,
    buttonsEnabled:
      session.connected && session.phase === "counting_down" && !stale,
    activeChoice: session.pendingChoice ?? session.myChoice,
    myScore: me?.score ?? 0,
    roster: session.roster,
    outcomeSign: result ? (Math.sign(result.outcome) as -1 | 0 | 1) : null,
    won: result ? result.winners.includes(session.player) : null,
    skipped: lastRow ? lastRow.myChoice === 0 : null,
    lastDelta: lastRow ? lastRow.myDelta : null,
    raster: session.history,
    showRaster: session.visibility === "full",
    reconnectBanner: !session.connected,
    notice: session.notice,
  };
}
