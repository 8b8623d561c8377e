"""Websocket server for live interaction sessions.

One interaction session per connection.  The client opens with a hello
message, then streams frame records and receives one state record per
frame; threshold patches apply to the running session and read back
exactly.  A dropped connection keeps its session alive for a grace
period, so a client that reconnects and presents its session id resumes
with engine state intact.

All messages are single JSON objects over text frames and carry a
mandatory version field.  Malformed input earns a structured error reply
and the session continues; only transport-level closure ends it.
"""

from __future__ import annotations

import asyncio
import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Optional

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from .config import EngineConfig
from .errors import EngineError, ParseError
from .state_machine import InteractionEngine, SceneObject
from .techniques import Technique
from .trace import TrialSpec, frame_from_record

PROTOCOL_VERSION = 1
RECONNECT_GRACE_S = 10.0
DEFAULT_PORT = 8765

_session_ids = itertools.count(1)


@dataclass
class _Session:
    session_id: str
    technique: Technique
    config: EngineConfig
    engine: Optional[InteractionEngine] = None
    attached: bool = True
    reaper: Optional[asyncio.TimerHandle] = field(default=None, repr=False)

    def step_frame(self, record: Any) -> dict[str, Any]:
        frame = frame_from_record(record)
        if self.engine is None:
            spec = TrialSpec()
            scene = SceneObject(center=spec.start_center(frame.head),
                                scale=1.0,
                                base_diameter=spec.base_diameter_m)
            self.engine = InteractionEngine(self.technique, self.config,
                                            scene)
        events = self.engine.step(frame)
        return {
            "type": "state",
            "version": PROTOCOL_VERSION,
            "t": frame.t,
            "state": self.engine.state_record(),
            "events": [event.to_record() for event in events],
        }

    def apply_patch(self, patch: Any) -> EngineConfig:
        self.config = self.config.patched(patch)
        if self.engine is not None:
            self.engine.config = self.config
        return self.config


class SessionHub:
    """Registry of live sessions, including ones waiting out the grace."""

    def __init__(self, grace_s: float = RECONNECT_GRACE_S):
        self.grace_s = grace_s
        self._sessions: dict[str, _Session] = {}

    def create(self, technique: Technique, config: EngineConfig) -> _Session:
        session = _Session(f"s{next(_session_ids):04d}", technique, config)
        self._sessions[session.session_id] = session
        return session

    def reattach(self, session_id: str) -> Optional[_Session]:
        session = self._sessions.get(session_id)
        if session is None or session.attached:
            return None
        if session.reaper is not None:
            session.reaper.cancel()
            session.reaper = None
        session.attached = True
        return session

    def release(self, session: _Session) -> None:
        """Start the reconnect grace timer for a detached session."""
        session.attached = False
        loop = asyncio.get_running_loop()
        session.reaper = loop.call_later(
            self.grace_s, self._sessions.pop, session.session_id, None)

    def drop(self, session: _Session) -> None:
        if session.reaper is not None:
            session.reaper.cancel()
        self._sessions.pop(session.session_id, None)


def _error(code: str, message: str) -> str:
    return json.dumps({"type": "error", "version": PROTOCOL_VERSION,
                       "code": code, "message": message})


def _config_reply(kind: str, config: EngineConfig) -> str:
    return json.dumps({"type": kind, "version": PROTOCOL_VERSION,
                       "config": config.to_record()})


def _parse_envelope(raw: str | bytes) -> dict[str, Any]:
    """Check the outer message shape: object, known type, right version."""
    if isinstance(raw, bytes):
        raise ParseError("binary frames are not accepted")
    try:
        message = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(message, dict) or not isinstance(
            message.get("type"), str):
        raise ParseError("message must be an object with a string 'type'")
    if message.get("version") != PROTOCOL_VERSION:
        raise ParseError(
            f"version must be {PROTOCOL_VERSION}, "
            f"got {message.get('version')!r}")
    return message


async def _handle_hello(websocket, hub: SessionHub,
                        config: EngineConfig) -> Optional[_Session]:
    """Wait for the opening hello; answer with the session handle."""
    async for raw in websocket:
        try:
            message = _parse_envelope(raw)
            if message["type"] != "hello":
                raise ParseError("first message must be 'hello'")
            wanted = message.get("session")
            if wanted is not None:
                session = hub.reattach(wanted)
                if session is None:
                    await websocket.send(_error(
                        "state", f"no detached session {wanted!r}"))
                    continue
                resumed = True
            else:
                name = message.get("technique", Technique.PTZ_AREA.value)
                session = hub.create(Technique.parse(name), config)
                resumed = False
        except (ParseError, ValueError) as exc:
            await websocket.send(_error("parse", str(exc)))
            continue
        await websocket.send(json.dumps({
            "type": "hello_ack",
            "version": PROTOCOL_VERSION,
            "session": session.session_id,
            "technique": session.technique.value,
            "resumed": resumed,
            "config": session.config.to_record(),
        }))
        return session
    return None


async def _handle_session(websocket, session: _Session) -> bool:
    """Run the message loop; True means the client said goodbye."""
    async for raw in websocket:
        try:
            message = _parse_envelope(raw)
        except ParseError as exc:
            await websocket.send(_error("parse", str(exc)))
            continue
        kind = message["type"]
        if kind == "frame":
            try:
                reply = session.step_frame(message.get("frame"))
            except ParseError as exc:
                await websocket.send(_error("parse", str(exc)))
                continue
            except EngineError as exc:
                await websocket.send(_error("state", str(exc)))
                continue
            await websocket.send(json.dumps(reply))
        elif kind == "config_patch":
            try:
                patched = session.apply_patch(message.get("patch"))
            except ParseError as exc:
                await websocket.send(_error("parse", str(exc)))
                continue
            await websocket.send(_config_reply("config_ack", patched))
        elif kind == "get_config":
            await websocket.send(_config_reply("config", session.config))
        elif kind == "bye":
            await websocket.send(json.dumps({
                "type": "bye_ack", "version": PROTOCOL_VERSION}))
            return True
        else:
            await websocket.send(_error("parse",
                                        f"unknown message type {kind!r}"))
    return False


def make_handler(hub: SessionHub, config: EngineConfig):
    async def handler(websocket) -> None:
        session: Optional[_Session] = None
        try:
            session = await _handle_hello(websocket, hub, config)
            if session is None:
                return
            finished = await _handle_session(websocket, session)
        except ConnectionClosed:
            finished = False
        if session is not None:
            if finished:
                hub.drop(session)
            else:
                hub.release(session)

    return handler


async def serve_sessions(port: int, config: EngineConfig,
                         host: str = "127.0.0.1",
                         grace_s: float = RECONNECT_GRACE_S):
    """Bind and return the server; caller decides how long it runs."""
    hub = SessionHub(grace_s)
    return await serve(make_handler(hub, config), host, port)


async def _serve_forever(port: int, config: EngineConfig, host: str,
                         grace_s: float) -> None:
    server = await serve_sessions(port, config, host, grace_s)
    # resolve the bound port so --port 0 announces a usable address
    bound = server.sockets[0].getsockname()[1] if server.sockets else port
    print(f"listening on ws://{host}:{bound}", flush=True)
    async with server:
        await server.serve_forever()


def run_server(port: int = DEFAULT_PORT,
               config: Optional[EngineConfig] = None,
               host: str = "127.0.0.1",
               grace_s: float = RECONNECT_GRACE_S) -> None:
    asyncio.run(_serve_forever(port, config or EngineConfig(), host,
                               grace_s))
