"""Turn free-form text into (landmark, attribute) directives.

A deterministic rule-based parser covers the shipped scenarios; a remote
model client with the same output contract is available when an endpoint
is configured.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from importlib import resources

TRAVERSABLE = 1
UNTRAVERSABLE = 0

# Tokens that terminate a noun phrase after a matched verb phrase.
_CONJUNCTIONS = {"and", "but", "or", "then", "while"}
_PREPOSITIONS = {
    "in", "of", "at", "on", "near", "behind", "under", "over", "by",
    "to", "from", "with", "into", "onto", "before", "after",
}
_DETERMINERS = {"the", "a", "an", "this", "that", "these", "those", "my", "your"}


@dataclass(frozen=True)
class Instruction:
    text: str


@dataclass(frozen=True)
class LandmarkDirective:
    label: str
    attribute: int  # 1 traversable, 0 untraversable
    source_action: str

    def __post_init__(self):
        if self.attribute not in (0, 1):
            raise ValueError("attribute must be 0 or 1")
        if not self.label:
            raise ValueError("label must be non-empty")


class VerbLexicon:
    """Traversal / avoidance verb phrases, loadable from a JSON config."""

    def __init__(self, traversal, avoidance):
        self.traversal = [p.lower() for p in traversal]
        self.avoidance = [p.lower() for p in avoidance]
        if not self.traversal or not self.avoidance:
            raise ValueError("lexicon needs at least one phrase of each kind")

    @classmethod
    def default(cls) -> "VerbLexicon":
        data = json.loads(
            resources.files("travnav").joinpath("assets/lexicon.json").read_text()
        )
        return cls(data["traversal"], data["avoidance"])

    @classmethod
    def load(cls, path) -> "VerbLexicon":
        with open(path) as fh:
            data = json.load(fh)
        return cls(data["traversal"], data["avoidance"])


def _tokenize(text: str):
    # Words and punctuation as separate tokens, lowercased.
    return re.findall(r"[a-z']+|[.,;:!?]", text.lower())


def parse_instruction(instr: Instruction, lexicon: VerbLexicon | None = None):
    """Extract (landmark, attribute) pairs in textual order.

    The label is the head noun (last token) of the phrase following a matched
    verb phrase. A landmark matched by both a traversal and an avoidance
    phrase resolves to untraversable.
    """
    if lexicon is None:
        lexicon = VerbLexicon.default()
    tokens = _tokenize(instr.text)

    phrases = [(p.split(), TRAVERSABLE, p) for p in lexicon.traversal]
    phrases += [(p.split(), UNTRAVERSABLE, p) for p in lexicon.avoidance]
    # Longest phrase wins at any position ("watch out for" over "watch out").
    phrases.sort(key=lambda e: len(e[0]), reverse=True)

    def phrase_at(i):
        for words, attr, raw in phrases:
            if tokens[i : i + len(words)] == words:
                return words, attr, raw
        return None

    matches = []  # (label, attr, action) in textual order
    i = 0
    while i < len(tokens):
        hit = phrase_at(i)
        if hit is None:
            i += 1
            continue
        words, attr, raw = hit
        j = i + len(words)
        noun = []
        while j < len(tokens):
            tok = tokens[j]
            if tok in _CONJUNCTIONS or tok in _PREPOSITIONS or re.match(r"[.,;:!?]", tok):
                break
            if phrase_at(j) is not None:
                break
            noun.append(tok)
            j += 1
        while noun and noun[0] in _DETERMINERS:
            noun.pop(0)
        if noun:
            matches.append((noun[-1], attr, raw))
        i = j if j > i + len(words) else i + len(words)

    # Resolve duplicates: untraversable wins; keep first-mention order.
    order = []
    resolved = {}
    for label, attr, action in matches:
        if label not in resolved:
            order.append(label)
            resolved[label] = (attr, action)
        else:
            prev_attr, prev_action = resolved[label]
            if attr == UNTRAVERSABLE and prev_attr == TRAVERSABLE:
                resolved[label] = (attr, action)

    return [
        LandmarkDirective(label, resolved[label][0], resolved[label][1])
        for label in order
    ]


class RemoteExtractionError(Exception):
    """Transport failure or a response that does not follow the contract."""

    def __init__(self, message, raw_response=None):
        super().__init__(message)
        self.raw_response = raw_response


def load_prompt_template() -> str:
    return resources.files("travnav").joinpath("assets/prompt_template.txt").read_text()


class ModelClient:
    """Blocking client for a remote instruction-extraction model."""

    def __init__(self, endpoint=None, api_key=None, transport=None):
        self.endpoint = endpoint or os.environ.get("MODEL_ENDPOINT")
        self.api_key = api_key or os.environ.get("MODEL_API_KEY")
        self._transport = transport

    def complete(self, prompt: str) -> str:
        if self._transport is not None:
            return self._transport(prompt)
        if not self.endpoint:
            raise RemoteExtractionError("no model endpoint configured")
        import requests

        try:
            resp = requests.post(
                self.endpoint,
                json={"prompt": prompt},
                headers={"Authorization": f"Bearer {self.api_key}"} if self.api_key else {},
                timeout=30,
            )
            resp.raise_for_status()
        except Exception as exc:  # noqa: BLE001 - report transport failures uniformly
            raise RemoteExtractionError(f"transport failure: {exc}") from exc
        return resp.text


_RESPONSE_SEG = re.compile(r'["`“”\s]*(.+?)["`“”\s]*\band\b\s*["`“”]*(\S+?)["`“”]*\s*$')


def parse_model_response(text: str):
    """Parse `<label> and <0|1>` segments separated by semicolons."""
    segments = [seg.strip() for seg in text.split(";") if seg.strip()]
    if not segments:
        raise RemoteExtractionError("empty model response", raw_response=text)
    directives = []
    for seg in segments:
        m = _RESPONSE_SEG.match(seg)
        if not m:
            raise RemoteExtractionError(
                f"unparseable response segment: {seg!r}", raw_response=text
            )
        label = m.group(1).strip().strip('"').lower()
        attr_tok = m.group(2)
        if attr_tok not in ("0", "1"):
            raise RemoteExtractionError(
                f"attribute token {attr_tok!r} outside {{0,1}}", raw_response=text
            )
        directives.append(LandmarkDirective(label, int(attr_tok), "remote"))
    return directives


def remote_extract(instr: Instruction, client: ModelClient):
    """Query the remote model with the prompt template + user instruction."""
    prompt = load_prompt_template() + "\n" + instr.text
    return parse_model_response(client.complete(prompt))
