"""Captioner-oracle subprocess protocol and the bundled mock captioner.

An oracle is any child process speaking line-delimited JSON on stdio:
request {"id": ..., "image": absolute path, "prompt": ...} in, response
{"id": ..., "caption": ...} out, one JSON object per line, answered in any
order. The process is spawned once per batch. The bundled mock modes give
the sweep deterministic stand-ins for a real captioning model.
"""

import json
import queue
import shlex
import subprocess
import threading
from pathlib import Path

from .imageio import load_image

DEFAULT_PROMPT = "Please describe this image in detail."
DEFAULT_TIMEOUT = 60.0

MOCK_MODES = ("echo", "energy", "gt", "fixed")
DEFAULT_MOCK_OBJECTS = ("unicorn", "dragon")


class OracleError(Exception):
    """Base class for captioner-oracle failures."""


class OracleSpawnError(OracleError):
    """The oracle command could not be started."""


class OracleTimeoutError(OracleError):
    """No response arrived within the per-request timeout."""


class OracleProtocolError(OracleError):
    """The oracle broke the line-delimited JSON contract."""


class CaptionOracle:
    """One spawned oracle process handling any number of requests."""

    def __init__(
        self,
        command,
        timeout=DEFAULT_TIMEOUT,
        prompt=DEFAULT_PROMPT,
        shutdown_grace=5.0,
    ):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise OracleSpawnError("oracle command is empty")
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
            )
        except OSError as exc:
            raise OracleSpawnError(f"cannot start oracle {argv[0]!r}: {exc}") from None
        self._timeout = timeout
        self._prompt = prompt
        self._grace = shutdown_grace
        self._lines = queue.Queue()
        self._line_no = 0
        self._answered = set()
        self._counter = 0
        reader = threading.Thread(target=self._pump, daemon=True)
        reader.start()

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def close(self):
        if self._proc.stdin and not self._proc.stdin.closed:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
        try:
            self._proc.wait(timeout=self._grace)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def _send(self, request_id, image_path):
        payload = {
            "id": request_id,
            "image": str(Path(image_path).resolve()),
            "prompt": self._prompt,
        }
        try:
            self._proc.stdin.write(json.dumps(payload) + "\n")
            self._proc.stdin.flush()
        except (OSError, ValueError) as exc:
            raise OracleProtocolError(f"oracle stdin closed early: {exc}") from None

    def _next_response(self, outstanding):
        while True:
            try:
                line = self._lines.get(timeout=self._timeout)
            except queue.Empty:
                waiting = ", ".join(sorted(outstanding))
                raise OracleTimeoutError(
                    f"no oracle response within {self._timeout:g}s; "
                    f"waiting for: {waiting}"
                ) from None
            if line is None:
                raise OracleProtocolError(
                    f"oracle exited with {len(outstanding)} request(s) unanswered"
                )
            self._line_no += 1
            line = line.strip()
            if not line:
                continue
            try:
                reply = json.loads(line)
            except json.JSONDecodeError as exc:
                raise OracleProtocolError(
                    f"oracle line {self._line_no}: invalid JSON ({exc.msg}): "
                    f"{line[:120]!r}"
                ) from None
            if (
                not isinstance(reply, dict)
                or not isinstance(reply.get("id"), str)
                or not isinstance(reply.get("caption"), str)
            ):
                raise OracleProtocolError(
                    f"oracle line {self._line_no}: response must carry "
                    f"string 'id' and 'caption': {line[:120]!r}"
                )
            rid = reply["id"]
            if rid in self._answered:
                raise OracleProtocolError(
                    f"oracle line {self._line_no}: duplicate response id {rid!r}"
                )
            if rid not in outstanding:
                raise OracleProtocolError(
                    f"oracle line {self._line_no}: unknown response id {rid!r}"
                )
            self._answered.add(rid)
            return rid, reply["caption"]

    def caption_batch(self, requests) -> dict:
        """Pipeline (id, image path) pairs; returns {id: caption}."""
        requests = list(requests)
        ids = [rid for rid, _ in requests]
        if len(set(ids)) != len(ids):
            raise ValueError("request ids must be unique within a batch")
        for rid, path in requests:
            self._send(rid, path)
        outstanding = set(ids)
        results = {}
        while outstanding:
            rid, caption = self._next_response(outstanding)
            outstanding.discard(rid)
            results[rid] = caption
        return results

    def caption(self, image_path) -> str:
        """Single-image convenience around caption_batch."""
        self._counter += 1
        rid = f"req-{self._counter}"
        return self.caption_batch([(rid, image_path)])[rid]


def oracle_caption(command, image_path, timeout=DEFAULT_TIMEOUT, prompt=DEFAULT_PROMPT):
    """Spawn, ask for one caption, and shut the oracle down."""
    with CaptionOracle(command, timeout=timeout, prompt=prompt) as oracle:
        return oracle.caption(image_path)


def object_sentence(objects) -> str:
    """Deterministic caption naming the given object classes, or empty."""
    names = [str(o).replace("_", " ") for o in sorted(objects)]
    if not names:
        return ""
    return "The image shows a " + " and a ".join(names) + "."


def mean_energy(image) -> float:
    """Mean squared intensity over all pixels and channels."""
    return float((image**2).mean())


def mock_oracle_loop(
    mode,
    stdin,
    stdout,
    threshold=0.01,
    objects=DEFAULT_MOCK_OBJECTS,
    ground_truth=None,
):
    """Serve the oracle protocol with a deterministic captioning rule.

    Modes: "echo" answers a fixed template naming the image path; "gt"
    answers exactly the ground-truth objects for the request id (empty
    caption when there are none); "fixed" always answers the configured
    object list; "energy" answers like "gt" while the mean squared
    intensity stays above the threshold and like "fixed" once the image
    has been damped below it.
    """
    if mode not in MOCK_MODES:
        raise ValueError(f"unknown mock mode {mode!r}")
    ground_truth = dict(ground_truth or {})
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        rid = request["id"]
        image_path = request["image"]
        if mode == "echo":
            caption = f"A picture stored at {image_path}."
        elif mode == "gt":
            caption = object_sentence(ground_truth.get(rid, ()))
        elif mode == "fixed":
            caption = object_sentence(objects)
        else:
            energy = mean_energy(load_image(image_path))
            if energy > threshold:
                caption = object_sentence(ground_truth.get(rid, ()))
            else:
                caption = object_sentence(objects)
        stdout.write(json.dumps({"id": rid, "caption": caption}) + "\n")
        stdout.flush()
