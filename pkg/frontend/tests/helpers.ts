/**
 * Test utilities: spawn the real interaction server as a subprocess and
 * adapt the `ws` client to the browser-style socket the client expects.
 */

import { spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { execFile } from "node:child_process";
import { promisify } from "node:util";
import WebSocket from "ws";

import { PlaygroundClient } from "../src/client.js";
import type { ClientOptions, SocketLike } from "../src/client.js";

export const execFileAsync = promisify(execFile);

export const PYTHON = process.env.PYTHON ?? "python3";

export interface ServerHandle {
  port: number;
  url: string;
  process: ChildProcess;
  stop(): Promise<void>;
}

/** Start `gazescale serve` on an ephemeral port and wait for its banner. */
export function startServer(extraArgs: string[] = []): Promise<ServerHandle> {
  const child = spawn(
    PYTHON,
    ["-m", "gazescale.cli", "serve", "--port", "0", ...extraArgs],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  return new Promise((resolve, reject) => {
    let stdout = "";
    let stderr = "";
    const timer = setTimeout(() => {
      child.kill("SIGKILL");
      reject(new Error(`server did not announce a port; stderr: ${stderr}`));
    }, 15_000);
    child.stderr?.on("data", (chunk: Buffer) => {
      stderr += chunk.toString();
    });
    child.stdout?.on("data", (chunk: Buffer) => {
      stdout += chunk.toString();
      const match = /listening on ws:\/\/127\.0\.0\.1:(\d+)/.exec(stdout);
      if (match === null) return;
      clearTimeout(timer);
      const port = Number(match[1]);
      resolve({
        port,
        url: `ws://127.0.0.1:${port}`,
        process: child,
        stop: () =>
          new Promise<void>((done) => {
            child.once("exit", () => done());
            child.kill("SIGINT");
            setTimeout(() => child.kill("SIGKILL"), 2000).unref();
          }),
      });
    });
    child.once("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited early (${code}); stderr: ${stderr}`));
    });
  });
}

export function nodeSocketFactory(url: string): SocketLike {
  return new WebSocket(url) as unknown as SocketLike;
}

export function makeClient(
  url: string,
  options: Omit<ClientOptions, "makeSocket"> = {},
): PlaygroundClient {
  return new PlaygroundClient(url, {
    ...options,
    makeSocket: nodeSocketFactory,
  });
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
