"""Prompt construction, completion providers, the persistent response cache,
and parsers for the direct-linking and re-ranking answer formats.

The prompt texts are frozen golden templates. Two mention-marking
conventions exist and must not be mixed: description prompts wrap the
mention as "{ surface }" with single spaces, while direct-linking and
re-rank prompts wrap it as "<MENTION> surface </MENTION>".
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import re
import string
import threading
import time
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol

import requests

from .core import Dataset, Entity, KnowledgeBase, MentionContext, PipelineError, normalize
from .io import AugmentationRecord, AugmentationSet

log = logging.getLogger(__name__)

DEFAULT_MAX_TOKENS = 150
DEFAULT_TEMPERATURE = 0.01

MENTION_OPEN = "<MENTION>"
MENTION_CLOSE = "</MENTION>"


class ProviderUnavailable(PipelineError):
    pass


class EmptyCompletion(PipelineError):
    pass


class MarkerCollision(PipelineError):
    pass


class TooManyCandidates(PipelineError):
    pass


class MissingAbstract(PipelineError):
    pass


@dataclass(frozen=True)
class GenerationParams:
    """Completion settings; defaults follow the reference setup (150 tokens,
    near-greedy temperature)."""

    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = DEFAULT_TEMPERATURE
    extra: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        object.__setattr__(self, "extra", tuple(self.extra))


class PromptKind(enum.Enum):
    AUGMENT_ZERO_SHOT = "augment-zero-shot"
    AUGMENT_THREE_SHOT = "augment-three-shot"
    DIRECT_EL = "direct-el"
    RERANK_100 = "rerank-100"
    RERANK_10 = "rerank-10"


@dataclass(frozen=True)
class Completion:
    text: str
    cached: bool
    provider: str
    fingerprint: str


# -- golden templates --------------------------------------------------------

_EX1_TEXT = (
    'Nearly 17 months after he first issued his call for a "fresh start after a season of '
    'cynicism", Gov. George W. Bush ended his quest for the presidency Monday on a nearly '
    "identical note, pledging to purge { Washington } of what he cast as a crippling discord.  "
    "The Texas governor claimed that Gore's decades of experience in Washington had estranged "
    "him from the rest of the country by making him too trusting of federal government and too "
    'fond of federal spending.  "My opponent vows to carry his home state", Bush said. " He may '
    'win Washington, D.C., but he\'s not going to win Tennessee. "He forgot his roots", Bush '
    'added. "He forgot where he\'s from. He trusts Washington. We trust the people."'
)

_EX1_ANSWER = (
    "Washington is the capital of the United States and the seat of the federal government. "
    "It is located on the Potomac River, between Maryland and Virginia. It is home to numerous "
    "monuments, memorials, and government buildings, including the White House, the Capitol "
    "Building, and the Supreme Court."
)

_EX2_TEXT = (
    "O'Donnell and Trump have been feuding since he announced last month that Miss USA Tara "
    "Conner, whose title had been in jeopardy because of underage drinking, would keep her "
    "crown.  Trump is the owner of the Miss Universe Organization, which includes Miss USA and "
    'Miss Teen USA.  The 44-year-old outspoken moderator of "The View", who joined the show in '
    "September, said Trump's news conference with { Conner } had annoyed her \"on a multitude "
    'of levels and that the twice-divorced real estate mogul had no right to be "the moral '
    'compass for 20-year-olds in America". Trump fired back, calling O\'Donnell a "loser" and '
    'a "bully", among other insults, in various media interviews.'
)

_EX2_ANSWER = (
    "Conner is the Miss USA titleholder whose title was in jeopardy due to underage drinking. "
    "She was saved from losing her crown by Donald Trump, the owner of the Miss Universe "
    "Organization, which includes Miss USA and Miss Teen USA. Tara Conner was given a second "
    "chance by Trump and was allowed to keep her crown."
)

_EX3_TEXT = (
    "Scottish Labour Party narrowly backs referendum.  STIRLING, Scotland 1996-08-31 British "
    "Labour Party leader Tony Blair won a narrow victory on Saturday when the party's Scottish "
    "executive voted 21-18 in favour of his plans for a referendum on a separate parliament "
    "for Scotland.  Blair once pledged to set up a Scottish parliament if the Labour won the "
    "next general election, which must be held by May 1997. Prime Minister John Major says the "
    "300-year-old union of the Scottish and English parliaments will be a main plank in his "
    "Conservative Party's election platform. Conservatives have only 10 of the 72 Scottish "
    "seats in parliament and consistently run third in opinion polls in Scotland behind "
    "{ Labour } and the independence-seeking Scottish National Party."
)

_EX3_ANSWER = (
    "The Labour Party is a centre-left political party in the United Kingdom. It is the main "
    "opposition party to the Conservative Party and is led by Tony Blair. The Labour Party has "
    "traditionally been strong in Scotland, and the Scottish Labour Party is a branch of the "
    "UK Labour Party. In the text, the Scottish Labour Party narrowly voted in favour of Tony "
    "Blair's plans for a referendum on a separate parliament for Scotland."
)


def _augment_exemplar(index: int, text: str, mention: str, answer: str) -> str:
    return (
        f"Example {index}. Consider the following text.\n"
        f"Text: {text}\n"
        f"Please provide me more descriptive information about {{ {mention} }} from the text above.\n"
        "Answer:\n"
        f"{answer}"
    )


AUGMENT_EXEMPLARS = "\n\n".join(
    [
        _augment_exemplar(1, _EX1_TEXT, "Washington", _EX1_ANSWER),
        _augment_exemplar(2, _EX2_TEXT, "Conner", _EX2_ANSWER),
        _augment_exemplar(3, _EX3_TEXT, "Labour", _EX3_ANSWER),
    ]
)

DIRECT_EL_INSTRUCTION = (
    "Gives the text and mentions within the text highlighted by <MENTION> and </MENTION>. "
    "Please give which page in Wikipedia this mention is most likely to be? "
    'Please answer me directly in this form: "{mention}":"{Wikipedia page url}".'
)

_DIRECT_EL_DEMOS = (
    (
        "Having caught the popular attention and with goodwill at a high-point , Nelsonic was "
        "able to obtain licensing from several big-name video game companies such as Sega , "
        "Nintendo ,<MENTION> Midway Games </MENTION>, and Mylstar Electronics .",
        '"Midway Games": "https://en.wikipedia.org/wiki/Midway_Games"',
    ),
    (
        "State Highway 110 or SH 110 is a state highway in the U.S. state of Texas that runs "
        "from Grand Saline to Rusk .  SH 110 begins at an intersection with and in downtown "
        "Rusk and leaves the courthouse square north with US 84 , crossing on its way to a "
        "split on the northeast side of Rusk where US 84 goes off east and SH 110 turns north "
        ", out of town .  The road passes <MENTION> Ponta </MENTION> and New Summerfield "
        "before crossing the county line into Smith County as it enters Troup .  After a brief "
        "downtown multiplex with SH 135 , SH 110 leaves Troup going northwest through "
        "Whitehouse on its way to Tyler .",
        '"Ponta": "https://en.wikipedia.org/wiki/Ponta,_Texas"',
    ),
    (
        "Messier 49 ( also known as M 49 or NGC 4472 ) is an elliptical galaxy located about "
        "away in the equatorial <MENTION> constellation </MENTION> of Virgo .  This galaxy was "
        "discovered by French astronomer Charles Messier on February 19 , 1771 .",
        '"constellation": "https://en.wikipedia.org/wiki/Constellation"',
    ),
)

DIRECT_EL_DEMO_BLOCK = "\n\n".join(f"Text: {text}\nAnswer: {answer}" for text, answer in _DIRECT_EL_DEMOS)

RERANK_INSTRUCTION = (
    "Gives the text and mentions within the text highlighted by <MENTION> and </MENTION>. "
    "Please select from the options below which Wikipedia page this mention is most likely to "
    'be from? Please answer me directly in this form: "({letter}): {Wikipedia entity name and '
    'url}".And I also want you to give an explanation in the next line.'
)

_RERANK_DEMO_TEXT = _DIRECT_EL_DEMOS[0][0]

RERANK_100_DEMO = (
    "Options:\n"
    "(1): ['Time Warner Interactive', 'https://en.wikipedia.org/wiki?curid=12642915']\n"
    "(2): ['TT Games', 'https://en.wikipedia.org/wiki?curid=49108324']\n"
    "(3): ['Atari Games', 'https://en.wikipedia.org/wiki?curid=304833']\n"
    "(4): ['Midway Games', 'https://en.wikipedia.org/wiki?curid=430266']\n"
    "(5): ['Vivendi Games', 'https://en.wikipedia.org/wiki?curid=6573837']\n"
    f"Text: {_RERANK_DEMO_TEXT}\n"
    "Answer: (4): ['Midway Games', 'https://en.wikipedia.org/wiki?curid=430266']\n"
    'Explanation: The mention "<MENTION> Midway Games </MENTION>" in the provided text is most '
    "likely from the Wikipedia page for Midway Games. Midway Games is mentioned in the text as "
    "one of the big-name video game companies from which Nelsonic obtained licensing. The "
    "description of Midway Games in option (4) matches the context in the text, making it the "
    "most likely source."
)

RERANK_10_DEMO = (
    "Options:\n"
    "(a): ['TT Games', 'https://en.wikipedia.org/wiki?curid=49108324', 'TT Games Limited is a "
    "British holding company and a subsidiary of Warner Bros. Games. ...']\n"
    "(b): ['Atari Games', 'https://en.wikipedia.org/wiki?curid=304833', 'Atari Games "
    "Corporation, known as Midway Games West Inc. after 1999, was an American producer of "
    "arcade games. ...']\n"
    "(c): ['Midway Games', 'https://en.wikipedia.org/wiki?curid=430266', 'Midway Games Inc., "
    "known previously as Midway Manufacturing and Bally Midway, and commonly known as simply "
    "Midway, was an American video game developer and publisher. ...']\n"
    f"Text: {_RERANK_DEMO_TEXT}\n"
    "Answer: (c): ['Midway Games', 'https://en.wikipedia.org/wiki?curid=430266']\n"
    'Explanation: For mention of "<MENTION> Midway Games </MENTION>", the most similar option '
    "is option (c) Midway Games. Additionally, the description in option (c) of Midway Games "
    "as an American video game developer and publisher matches the context in the text, making "
    "it the most likely source."
)


# -- prompt builders ---------------------------------------------------------


def wrap_mention_braces(mc: MentionContext) -> str:
    """Context with the mention occurrence wrapped as "{ surface }"."""
    return (
        mc.context[: mc.start]
        + "{ "
        + mc.surface
        + " }"
        + mc.context[mc.start + mc.length :]
    )


def wrap_mention_markers(mc: MentionContext) -> str:
    """Context with the mention occurrence wrapped in <MENTION> markers."""
    if MENTION_OPEN in mc.surface or MENTION_CLOSE in mc.surface:
        raise MarkerCollision(f"surface {mc.surface!r} contains a mention marker")
    return (
        mc.context[: mc.start]
        + MENTION_OPEN
        + " "
        + mc.surface
        + " "
        + MENTION_CLOSE
        + mc.context[mc.start + mc.length :]
    )


def _augment_question(mc: MentionContext, lead: str) -> str:
    return (
        f"{lead}\n"
        f"Text: {wrap_mention_braces(mc)}\n"
        f"Please provide me more descriptive information about {{ {mc.surface} }} from the "
        f"text above. Make sure to include {{ {mc.surface} }} in your description.\n"
        "Answer:"
    )


def build_augment_prompt(
    mc: MentionContext, kind: PromptKind = PromptKind.AUGMENT_THREE_SHOT
) -> str:
    """Instantiate the description-generation prompt for one mention.

    The zero-shot variant is the bare task template; the three-shot variant
    prepends the three frozen exemplars. Output always ends with an
    "Answer:" line.
    """
    if kind is PromptKind.AUGMENT_ZERO_SHOT:
        return _augment_question(mc, "Consider the following text.")
    if kind is PromptKind.AUGMENT_THREE_SHOT:
        return AUGMENT_EXEMPLARS + "\n\n" + _augment_question(mc, "Now consider the following text.")
    raise ValueError(f"not an augmentation prompt kind: {kind}")


def build_direct_el_prompt(mc: MentionContext) -> str:
    """Prompt asking the model to name the Wikipedia page for the mention."""
    return (
        DIRECT_EL_INSTRUCTION
        + "\n\n"
        + DIRECT_EL_DEMO_BLOCK
        + "\n\n"
        + f"Text: {wrap_mention_markers(mc)}\n"
        + "Answer:"
    )


def _option_line(label: str, parts: list[str]) -> str:
    rendered = ", ".join(repr(p) for p in parts)
    return f"({label}): [{rendered}]"


def build_rerank_prompt(
    mc: MentionContext,
    candidates: list[tuple[Entity, str | None]],
    variant: PromptKind = PromptKind.RERANK_100,
) -> str:
    """Prompt asking the model to pick among retrieved candidates.

    The wide variant numbers up to 100 (title, url) options; the narrow
    variant letters up to 10 options and requires a Wikipedia abstract for
    each candidate.
    """
    if variant not in (PromptKind.RERANK_100, PromptKind.RERANK_10):
        raise ValueError(f"not a re-rank prompt kind: {variant}")
    if not candidates:
        raise ValueError("candidate list must be nonempty")
    limit = 100 if variant is PromptKind.RERANK_100 else 10
    if len(candidates) > limit:
        raise TooManyCandidates(f"{len(candidates)} candidates exceed the {limit} limit")

    lines = ["Options:"]
    if variant is PromptKind.RERANK_100:
        instruction = "Instruction: " + RERANK_INSTRUCTION
        demo = RERANK_100_DEMO
        for i, (entity, _) in enumerate(candidates, start=1):
            lines.append(_option_line(str(i), [entity.title, entity.url or ""]))
    else:
        instruction = RERANK_INSTRUCTION
        demo = RERANK_10_DEMO
        for i, (entity, abstract) in enumerate(candidates):
            if abstract is None:
                raise MissingAbstract(f"candidate {entity.id!r} has no abstract")
            lines.append(
                _option_line(string.ascii_lowercase[i], [entity.title, entity.url or "", abstract])
            )
    options_block = "\n".join(lines)
    return (
        instruction
        + "\n\n"
        + demo
        + "\n\n"
        + options_block
        + "\n"
        + f"Text: {wrap_mention_markers(mc)}\n"
        + "Answer:"
    )


# -- providers ---------------------------------------------------------------


class Provider(Protocol):
    """Completion provider: a label plus a prompt-to-text callable."""

    name: str
    model: str

    def complete(self, prompt: str, params: GenerationParams) -> str: ...


@dataclass
class RetryPolicy:
    attempts: int = 3
    base_delay: float = 1.0


_SENTENCE_END_RE = re.compile(r"[.!?]")


def _sentence_around(text: str, pos: int) -> str:
    """The sentence of ``text`` containing offset ``pos`` (punctuation kept)."""
    start = 0
    for match in _SENTENCE_END_RE.finditer(text, 0, pos):
        start = match.end()
    end_match = _SENTENCE_END_RE.search(text, pos)
    end = end_match.end() if end_match else len(text)
    return text[start:end].strip()


@dataclass
class MockProvider:
    """Offline deterministic provider for tests and reproducible runs.

    For description prompts it echoes the mention plus the sentence of the
    context containing it: "<surface> is mentioned here. <sentence>".
    An optional knowledge table (lowercased cue substring -> fact) emulates
    model-internal world knowledge: facts whose cue occurs in the question
    context are appended to the echo. Without a table the provider is a pure
    echo. Direct-linking prompts get a guessed wiki URL built from the
    surface; re-rank prompts always answer the first option.
    """

    name: str = "mock"
    model: str = "echo-1"
    knowledge: Mapping[str, str] | None = None
    calls: int = 0

    def complete(self, prompt: str, params: GenerationParams) -> str:
        self.calls += 1
        if "Options:" in prompt and MENTION_OPEN in prompt:
            return "(1)" if "(1):" in prompt.rsplit("Options:", 1)[1] else "(a)"
        if MENTION_OPEN in prompt:
            return self._direct_el(prompt)
        return self._augment(prompt)

    def _augment(self, prompt: str) -> str:
        # Work backwards from the fixed template tail so context text that
        # happens to contain template phrases cannot confuse extraction.
        tail = " } in your description.\nAnswer:"
        mark = "Make sure to include { "
        if not prompt.endswith(tail):
            return "No description available."
        head = prompt[: -len(tail)]
        pos = head.rfind(mark)
        if pos < 0:
            return "No description available."
        surface = head[pos + len(mark) :]
        instruction = (
            f"\nPlease provide me more descriptive information about {{ {surface} }} from the "
            f"text above. {mark}{surface}{tail}"
        )
        if not prompt.endswith(instruction):
            return "No description available."
        body = prompt[: -len(instruction)]
        text_pos = body.rfind("\nText: ")
        if text_pos < 0 and body.startswith("Consider the following text.\nText: "):
            text_pos = body.index("\nText: ")
        if text_pos < 0:
            return "No description available."
        context = body[text_pos + len("\nText: ") :]
        wrapped = "{ " + surface + " }"
        occurrence = context.find(wrapped)
        if occurrence < 0:
            sentence = context.strip()
        else:
            sentence = _sentence_around(context, occurrence).replace(wrapped, surface, 1)
        text = f"{surface} is mentioned here. {sentence}"
        if self.knowledge:
            lowered = context.lower()
            for cue in sorted(self.knowledge):
                if cue.lower() in lowered:
                    text += " " + self.knowledge[cue]
        return text

    def _direct_el(self, prompt: str) -> str:
        block = prompt.rsplit(MENTION_OPEN, 1)[-1]
        surface = block.split(MENTION_CLOSE, 1)[0].strip()
        slug = urllib.parse.quote(surface.replace(" ", "_"), safe="_,()")
        return f'"{surface}": "https://en.wikipedia.org/wiki/{slug}"'


@dataclass
class HttpProvider:
    """Client for a chat/completions-style HTTP endpoint.

    Sends {model, messages|prompt, max_tokens, temperature}; the bearer token
    comes from the LLMAEL_API_KEY environment variable (resolved by the CLI
    and passed in here).
    """

    endpoint: str
    model: str
    name: str = "http"
    api_key: str | None = None
    style: str = "chat"  # "chat" sends messages, "completion" sends prompt
    timeout: float = 60.0
    session: requests.Session = field(default_factory=requests.Session, repr=False)

    def complete(self, prompt: str, params: GenerationParams) -> str:
        body: dict = {
            "model": self.model,
            "max_tokens": params.max_tokens,
            "temperature": params.temperature,
        }
        body.update(dict(params.extra))
        if self.style == "chat":
            body["messages"] = [{"role": "user", "content": prompt}]
        else:
            body["prompt"] = prompt
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        response = self.session.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
        response.raise_for_status()
        payload = response.json()
        choice = payload["choices"][0]
        if "message" in choice:
            return choice["message"]["content"]
        return choice["text"]


# -- cache and generation ----------------------------------------------------


def fingerprint(provider: str, model: str, prompt: str, params: GenerationParams) -> str:
    """Deterministic identity of one completion request."""
    payload = json.dumps(
        {
            "provider": provider,
            "model": model,
            "prompt": prompt,
            "max_tokens": params.max_tokens,
            "temperature": params.temperature,
            "extra": sorted(params.extra),
        },
        sort_keys=True,
        ensure_ascii=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class CompletionCache:
    """Fingerprint-keyed completion store, persisted as JSONL.

    Lines reuse the augmentation-record shape with the fingerprint as key so
    cache files stay diff-able and append-friendly. Writes are serialized
    through a single lock; a cache with ``path=None`` is memory-only.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, str] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with open(self.path, encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    obj = json.loads(line)
                    self._entries[obj["fingerprint"]] = obj["description"]

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key: str) -> str | None:
        return self._entries.get(key)

    def put(self, key: str, provider: str, text: str) -> None:
        with self._lock:
            if key in self._entries:
                return
            self._entries[key] = text
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as handle:
                    handle.write(
                        json.dumps(
                            {"fingerprint": key, "provider": provider, "description": text},
                            ensure_ascii=False,
                        )
                        + "\n"
                    )


def generate(
    provider: Provider,
    prompt: str,
    params: GenerationParams,
    cache: CompletionCache,
    retry: RetryPolicy | None = None,
) -> Completion:
    """Complete a prompt through the cache.

    A cache hit performs no provider call; a miss calls the provider with
    bounded retries and stores the result, so identical (provider, model,
    prompt, params) always yields identical text thereafter.
    """
    key = fingerprint(provider.name, provider.model, prompt, params)
    cached = cache.get(key)
    if cached is not None:
        return Completion(cached, cached=True, provider=provider.name, fingerprint=key)
    retry = retry or RetryPolicy()
    last_error: Exception | None = None
    for attempt in range(retry.attempts):
        try:
            text = provider.complete(prompt, params)
            break
        except Exception as exc:  # transport and response-shape failures alike
            last_error = exc
            if attempt + 1 < retry.attempts:
                time.sleep(retry.base_delay * (2**attempt))
    else:
        raise ProviderUnavailable(
            f"provider {provider.name!r} failed after {retry.attempts} attempts: {last_error}"
        )
    if not text:
        raise EmptyCompletion(f"provider {provider.name!r} returned empty text")
    cache.put(key, provider.name, text)
    return Completion(text, cached=False, provider=provider.name, fingerprint=key)


def provider_label(provider: Provider) -> str:
    if provider.model and provider.model != provider.name:
        return f"{provider.name}/{provider.model}"
    return provider.name


def augment_dataset(
    dataset: Dataset,
    provider: Provider,
    params: GenerationParams,
    cache: CompletionCache,
    kind: PromptKind = PromptKind.AUGMENT_THREE_SHOT,
    retry: RetryPolicy | None = None,
    concurrency: int = 1,
) -> AugmentationSet:
    """Generate one description per mention, in dataset order.

    Per-record failures are logged and leave the key missing; they never
    abort the batch. Results are merged in input order regardless of
    completion order, so output is deterministic under concurrency.
    """
    label = provider_label(provider)

    def one(record: MentionContext) -> AugmentationRecord | None:
        prompt = build_augment_prompt(record, kind)
        try:
            completion = generate(provider, prompt, params, cache, retry=retry)
        except PipelineError as exc:
            log.warning("augmentation failed for %s: %s", record.key, exc)
            return None
        return AugmentationRecord(
            doc_id=record.doc_id,
            start=record.start,
            length=record.length,
            provider=label,
            description=completion.text,
        )

    if concurrency > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            results = list(pool.map(one, dataset.records))
    else:
        results = [one(r) for r in dataset.records]

    records = {r.key: r for r in results if r is not None}
    return AugmentationSet(provider=label, records=records, params=params)


# -- answer parsers ----------------------------------------------------------

_URL_RE = re.compile(r"https?://[^\s\"'\])>]+")
_LABEL_RE = re.compile(r"\(([0-9]+|[A-Za-z])\)")


def parse_direct_el_answer(text: str, kb: KnowledgeBase) -> str | None:
    """Resolve a direct-linking answer to an entity id, or None.

    Takes the last URL-shaped token; resolves by exact URL match, then by the
    last path segment (percent-decoded, underscores to spaces) against entity
    titles under normalization. Never raises on arbitrary input.
    """
    try:
        urls = _URL_RE.findall(text)
        if not urls:
            return None
        url = urls[-1].rstrip(".,;:!?")
        for entity in kb.entities.values():
            if entity.url == url:
                return entity.id
        path = urllib.parse.urlsplit(url).path
        segment = path.rsplit("/", 1)[-1]
        if not segment:
            return None
        title = normalize(urllib.parse.unquote(segment).replace("_", " "))
        matches = sorted(
            entity.id for entity in kb.entities.values() if normalize(entity.title) == title
        )
        return matches[0] if matches else None
    except Exception:
        return None


def parse_rerank_answer(text: str, candidates: list) -> int | None:
    """Extract the first option label and map it to a candidate index.

    Numeric labels are 1-based; letter labels map a->0 through z->25.
    Out-of-range labels and unparseable text yield None. Never raises.
    """
    if not candidates:
        raise ValueError("candidate list must be nonempty")
    try:
        match = _LABEL_RE.search(text)
        if match is None:
            return None
        label = match.group(1)
        if label.isdigit():
            index = int(label) - 1
        else:
            index = ord(label.lower()) - ord("a")
        if 0 <= index < len(candidates):
            return index
        return None
    except Exception:
        return None
