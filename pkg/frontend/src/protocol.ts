// JSON message schema of the game service, carried verbatim over the socket.

export type Choice = -1 | 0 | 1;

export interface RosterEntry {
  player: string;
  name: string;
  kind: "human" | "bot";
  score: number;
}

export type ClientMessage =
  | { type: "join"; room: string; player: string; name?: string }
  | { type: "leave"; room: string; player: string }
  | { type: "choose"; room: string; player: string; value: Choice }
  | { type: "start"; room: string; player: string };

export interface StateMessage {
  type: "state";
  server_time: number | null;
  phase: "lobby" | "counting_down" | "settling";
  round: number;
  rounds: number;
  deadline: number | null;
  roster: RosterEntry[];
  chosen: string[];
  countdown_seconds: number;
  visibility: "own" | "full";
  your_choice?: Choice;
}

export interface RoundStartMessage {
  type: "round_start";
  round: number;
  server_time: number;
  deadline: number;
  roster: RosterEntry[];
  superplayer: number;
}

export interface RoundResultMessage {
  type: "round_result";
  round: number;
  server_time: number;
  outcome: number;
  winners: string[];
  points: Record<string, number>;
  scores: Record<string, number>;
  superplayer: number;
  deadline: null;
  choices?: Record<string, Choice>;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMessage =
  | StateMessage
  | RoundStartMessage
  | RoundResultMessage
  | ErrorMessage;
