"""Newline-delimited JSON client for external readers.

Protocol (one JSON object per line, canonical serialization):
  -> {"op":"train","dataset_path":"...","config":{...}}
  <- {"ok":true,"model_id":"..."}
  -> {"op":"predict","model_id":"...","items":[{"context":...,"question":...,"language":...}]}
  <- {"ok":true,"results":[{"windows":[{"token_offsets":[[s,e],...],
                                         "start_probs":[...],"end_probs":[...]}]}]}
  <- {"ok":false,"error":"message"} on any failure.

The "language" item key and the "language" train-config key tell the remote
reader which tokenizer to apply; probabilities travel as 17-significant-digit
decimals so both sides agree on the exact doubles.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
import tempfile
from pathlib import Path

from .corpus import Context, Dataset, Question, save_squad_json
from .errors import ReaderError, TransportError
from .numerics import canonical_json
from .reader import SpanDistributions, TrainConfig, Window


class StdioTransport:
    """Spawns the adapter as a child process and talks over its pipes."""

    def __init__(self, command: str):
        self.command = command
        try:
            self.proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
            )
        except OSError as exc:
            raise TransportError(f"cannot spawn reader {command!r}: {exc}") from exc

    def round_trip(self, line: str) -> str:
        try:
            assert self.proc.stdin and self.proc.stdout
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
            reply = self.proc.stdout.readline()
        except (OSError, ValueError) as exc:
            raise TransportError(f"reader pipe failed: {exc}") from exc
        if not reply:
            raise TransportError("reader closed its output stream")
        return reply.rstrip("\n")

    def close(self) -> None:
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait(timeout=10)


class TcpTransport:
    def __init__(self, address: str):
        host, _, port = address.rpartition(":")
        try:
            self.sock = socket.create_connection((host, int(port)), timeout=30)
        except OSError as exc:
            raise TransportError(f"cannot connect to reader at {address}: {exc}") from exc
        self.reader = self.sock.makefile("r", encoding="utf-8")

    def round_trip(self, line: str) -> str:
        try:
            self.sock.sendall((line + "\n").encode("utf-8"))
            reply = self.reader.readline()
        except OSError as exc:
            raise TransportError(f"reader socket failed: {exc}") from exc
        if not reply:
            raise TransportError("reader closed the connection")
        return reply.rstrip("\n")

    def close(self) -> None:
        self.reader.close()
        self.sock.close()


class ReaderClient:
    """Sequential request/response client over a transport."""

    def __init__(self, transport):
        self.transport = transport

    def request(self, payload: dict) -> dict:
        reply = self.transport.round_trip(canonical_json(payload))
        try:
            response = json.loads(reply)
        except json.JSONDecodeError as exc:
            raise TransportError(f"unparseable reader reply: {reply!r}") from exc
        if not response.get("ok"):
            raise ReaderError(str(response.get("error", "unknown reader error")))
        return response

    def train(self, dataset_path: str, config: TrainConfig, language: str) -> str:
        cfg = config.to_json_dict()
        cfg["language"] = language
        response = self.request(
            {"op": "train", "dataset_path": dataset_path, "config": cfg}
        )
        return response["model_id"]

    def predict(self, model_id: str, items: list[dict]) -> list[SpanDistributions]:
        response = self.request(
            {"op": "predict", "model_id": model_id, "items": items}
        )
        out = []
        for result in response["results"]:
            windows = tuple(
                Window(
                    token_offsets=tuple((s, e) for s, e in w["token_offsets"]),
                    start_probs=tuple(w["start_probs"]),
                    end_probs=tuple(w["end_probs"]),
                )
                for w in result["windows"]
            )
            out.append(SpanDistributions(windows=windows))
        return out

    def close(self) -> None:
        self.transport.close()


class ExternalReader:
    """ReaderModel of kind external: a model id bound to a client."""

    kind = "external"

    def __init__(self, client: ReaderClient, model_id: str | None = None,
                 language: str = "en"):
        self.client = client
        self.model_id = model_id
        self.language = language

    def trained_on(self, data: Dataset, config: TrainConfig) -> "ExternalReader":
        with tempfile.TemporaryDirectory(prefix="spanforge-wire-") as tmp:
            path = Path(tmp) / "train.json"
            save_squad_json(data, path)
            model_id = self.client.train(str(path), config, data.language)
        return ExternalReader(self.client, model_id, data.language)

    def predict_one(self, context: Context, question: Question,
                    language: str | None = None) -> SpanDistributions:
        if self.model_id is None:
            raise ReaderError("external reader has no trained model bound")
        items = [
            {
                "context": context.text,
                "question": question.text,
                "language": language or self.language,
            }
        ]
        return self.client.predict(self.model_id, items)[0]

    def checkpoint_payload(self) -> dict:
        return {
            "kind": "external",
            "language": self.language,
            "model_id": self.model_id,
        }
