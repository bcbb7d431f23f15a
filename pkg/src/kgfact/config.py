"""Run configuration: JSON loading, validation, and runtime assembly.

A config file is self-contained apart from credentials, which are named by
environment variable (api_key_env) and resolved at startup. Relative paths
inside the file are resolved against the file's own directory, so a config
can travel with its fixtures.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import json

from kgfact.backends import roles as role_defs
from kgfact.backends.base import ChatBackend, EmbeddingBackend, NliBackend
from kgfact.backends.http import HttpChatBackend, HttpEmbeddingBackend, HttpNliBackend
from kgfact.backends.mock import (
    HashEmbeddingBackend,
    MockAbstentionJudge,
    MockEntailmentJudge,
    MockExpertJudge,
    MockSubjectModel,
    MockTranslator,
    RuleNliBackend,
    SubjectCard,
)
from kgfact.backends.roles import CHAT_ROLES, RoleBinding
from kgfact.difficulty import WeightTable, load_weight_table
from kgfact.errors import ConfigError
from kgfact.kg.client import KgClient, KgEndpoints
from kgfact.kg.mock import MOCK_ENDPOINTS, MockEntity, MockKgTransport, load_mock_corpus
from kgfact.questions import DEATH_RELATION
from kgfact.tables import TypeClassTable, default_table_paths, load_type_class_table
from kgfact.transport import (
    CachingTransport,
    FixtureStore,
    HttpTransport,
    RateLimitedTransport,
    RateLimiter,
    RecordingTransport,
    ReplayTransport,
    Transport,
)
from kgfact.util import Clock, VirtualClock
from kgfact.verification import DEFAULT_THRESHOLD, Verifier

log = logging.getLogger(__name__)

_ROLE_MOCKS = {
    role_defs.EVALUATED_MODEL: "subject",
    role_defs.ABSTENTION_DETECTOR: "abstention",
    role_defs.FACT_TRANSLATOR: "translator",
    role_defs.LLM_ENTAILMENT: "entailment",
    role_defs.EXPERT: "expert",
}

_TOP_KEYS = {
    "seed",
    "questions_per_run",
    "runs",
    "threshold",
    "weight_file",
    "output_dir",
    "max_concurrent_questions",
    "sample_batch_size",
    "max_sample_attempts",
    "dok_variant",
    "token_mode",
    "virtual_clock",
    "type_table",
    "relation_table",
    "kg",
    "transport",
    "embedding",
    "nli",
    "roles",
}

_KG_LIVE_KEYS = {
    "sparql_url",
    "action_api_url",
    "pageviews_url_template",
    "description_url_template",
    "sample_query_template",
    "subgraph_query_template",
    "page_view_window",
    "sitelink_site",
    "description_token_cap",
    "rate_limit_rps",
}

_ROLE_LIVE_KEYS = {"base_url", "model_id", "api_key_env", "timeout",
                   "temperature", "top_p", "max_tokens"}


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings; sub-blocks stay as plain dicts for assembly."""

    seed: int
    output_dir: Path
    kg: dict[str, Any]
    embedding: dict[str, Any]
    nli: dict[str, Any]
    roles: dict[str, dict[str, Any]]
    questions_per_run: int = 150
    runs: int = 1
    threshold: float = DEFAULT_THRESHOLD
    weight_file: Path | None = None
    max_concurrent_questions: int = 8
    sample_batch_size: int = 20
    max_sample_attempts: int = 8
    dok_variant: str = "aligned"
    token_mode: str = "token_set"
    virtual_clock: bool = False
    type_table: Path | None = None
    relation_table: Path | None = None
    transport: dict[str, Any] | None = None


def _fail(where: str, message: str) -> ConfigError:
    return ConfigError(f"{where}: {message}")


def _expect(raw: Any, where: str, kind: type, kind_name: str) -> Any:
    if kind is float and isinstance(raw, int) and not isinstance(raw, bool):
        raw = float(raw)
    if not isinstance(raw, kind) or (kind is int and isinstance(raw, bool)):
        raise _fail(where, f"must be {kind_name}, got {type(raw).__name__}")
    return raw


def _check_keys(block: dict, allowed: set[str], where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise _fail(where, f"unknown keys {sorted(unknown)}")


def _validate_kg(block: Any) -> dict[str, Any]:
    block = _expect(block, "kg", dict, "an object")
    if "mock_corpus" in block:
        _check_keys(block, {"mock_corpus"}, "kg")
        _expect(block["mock_corpus"], "kg.mock_corpus", str, "a path string")
        return block
    _check_keys(block, _KG_LIVE_KEYS, "kg")
    for key in ("sparql_url", "action_api_url", "pageviews_url_template",
                "description_url_template"):
        if key not in block:
            raise _fail("kg", f"live mode requires {key} (or use mock_corpus)")
        _expect(block[key], f"kg.{key}", str, "a string")
    if "rate_limit_rps" in block and _expect(
        block["rate_limit_rps"], "kg.rate_limit_rps", float, "a number"
    ) <= 0:
        raise _fail("kg.rate_limit_rps", "must be positive")
    if "page_view_window" in block:
        window = block["page_view_window"]
        if not (isinstance(window, list) and len(window) == 2
                and all(isinstance(m, str) for m in window)):
            raise _fail("kg.page_view_window", 'must be ["YYYY-MM", "YYYY-MM"]')
    return block


def _validate_transport(block: Any) -> dict[str, Any] | None:
    if block is None:
        return None
    block = _expect(block, "transport", dict, "an object")
    _check_keys(block, {"mode", "fixture_dir"}, "transport")
    mode = block.get("mode", "live")
    if mode not in ("live", "record", "replay"):
        raise _fail("transport.mode", "must be 'live', 'record', or 'replay'")
    if mode != "live" and "fixture_dir" not in block:
        raise _fail("transport", f"mode '{mode}' requires fixture_dir")
    return block


def _validate_embedding(block: Any) -> dict[str, Any]:
    block = _expect(block, "embedding", dict, "an object")
    if block.get("mock") is not None:
        if block["mock"] != "hash":
            raise _fail("embedding.mock", f"unknown mock {block['mock']!r}; only 'hash'")
        _check_keys(block, {"mock", "dimension", "seed"}, "embedding")
    else:
        _check_keys(block, {"base_url", "model_id", "dimension", "api_key_env",
                            "timeout"}, "embedding")
        for key in ("base_url", "model_id"):
            if key not in block:
                raise _fail("embedding", f"requires {key} (or set mock: 'hash')")
        if "dimension" not in block:
            raise _fail("embedding", "requires dimension")
    if "dimension" in block and _expect(
        block["dimension"], "embedding.dimension", int, "an integer"
    ) < 1:
        raise _fail("embedding.dimension", "must be positive")
    return block


def _validate_nli(block: Any) -> dict[str, Any]:
    block = _expect(block, "nli", dict, "an object")
    if block.get("mock") is not None:
        if block["mock"] != "rule":
            raise _fail("nli.mock", f"unknown mock {block['mock']!r}; only 'rule'")
        _check_keys(block, {"mock"}, "nli")
    else:
        _check_keys(block, {"base_url", "api_key_env", "timeout"}, "nli")
        if "base_url" not in block:
            raise _fail("nli", "requires base_url (or set mock: 'rule')")
    return block


def _validate_roles(block: Any, kg_block: dict[str, Any]) -> dict[str, dict[str, Any]]:
    block = _expect(block, "roles", dict, "an object")
    unknown = set(block) - set(CHAT_ROLES)
    if unknown:
        raise _fail("roles", f"unknown roles {sorted(unknown)}; expected {list(CHAT_ROLES)}")
    for role in CHAT_ROLES:
        if role not in block:
            raise _fail("roles", f"missing binding for role '{role}'")
        spec = _expect(block[role], f"roles.{role}", dict, "an object")
        if spec.get("mock") is not None:
            _check_keys(spec, {"mock"}, f"roles.{role}")
            expected = _ROLE_MOCKS[role]
            if spec["mock"] != expected:
                raise _fail(f"roles.{role}.mock",
                            f"unknown mock {spec['mock']!r}; this role accepts '{expected}'")
            if expected == "subject" and "mock_corpus" not in kg_block:
                raise _fail(f"roles.{role}",
                            "mock 'subject' needs kg.mock_corpus to build its answers")
        else:
            _check_keys(spec, _ROLE_LIVE_KEYS, f"roles.{role}")
            for key in ("base_url", "model_id"):
                if key not in spec:
                    raise _fail(f"roles.{role}", f"requires {key} (or a mock binding)")
            for key, kind, kind_name in (("temperature", float, "a number"),
                                         ("top_p", float, "a number"),
                                         ("max_tokens", int, "an integer")):
                if spec.get(key) is not None:
                    _expect(spec[key], f"roles.{role}.{key}", kind, kind_name)
    return block


def _resolve_path(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "config")
    for key in ("seed", "output_dir", "kg", "embedding", "nli", "roles"):
        if key not in raw:
            raise ConfigError(f"config: missing required key '{key}'")

    base = path.resolve().parent
    seed = _expect(raw["seed"], "seed", int, "an integer")
    questions = _expect(raw.get("questions_per_run", 150), "questions_per_run",
                        int, "an integer")
    runs = _expect(raw.get("runs", 1), "runs", int, "an integer")
    threshold = _expect(raw.get("threshold", DEFAULT_THRESHOLD), "threshold",
                        float, "a number")
    concurrency = _expect(raw.get("max_concurrent_questions", 8),
                          "max_concurrent_questions", int, "an integer")
    batch = _expect(raw.get("sample_batch_size", 20), "sample_batch_size",
                    int, "an integer")
    attempts = _expect(raw.get("max_sample_attempts", 8), "max_sample_attempts",
                       int, "an integer")
    for name, value in (("questions_per_run", questions), ("runs", runs),
                        ("max_concurrent_questions", concurrency),
                        ("sample_batch_size", batch),
                        ("max_sample_attempts", attempts)):
        if value < 1:
            raise _fail(name, "must be at least 1")
    if not 0.0 <= threshold <= 1.0:
        raise _fail("threshold", "must be in [0, 1]")
    dok_variant = raw.get("dok_variant", "aligned")
    if dok_variant not in ("aligned", "all"):
        raise _fail("dok_variant", "must be 'aligned' or 'all'")
    token_mode = raw.get("token_mode", "token_set")
    if token_mode not in ("token_set", "plain"):
        raise _fail("token_mode", "must be 'token_set' or 'plain'")
    virtual_clock = _expect(raw.get("virtual_clock", False), "virtual_clock",
                            bool, "a boolean")

    kg_block = _validate_kg(raw["kg"])
    if "mock_corpus" in kg_block:
        kg_block = {**kg_block, "mock_corpus": str(_resolve_path(base, kg_block["mock_corpus"]))}
    transport_block = _validate_transport(raw.get("transport"))
    if transport_block and "fixture_dir" in transport_block:
        transport_block = {
            **transport_block,
            "fixture_dir": str(_resolve_path(base, transport_block["fixture_dir"])),
        }
    embedding_block = _validate_embedding(raw["embedding"])
    nli_block = _validate_nli(raw["nli"])
    roles_block = _validate_roles(raw["roles"], kg_block)

    def opt_path(key: str) -> Path | None:
        value = raw.get(key)
        if value is None:
            return None
        return _resolve_path(base, _expect(value, key, str, "a path string"))

    return RunConfig(
        seed=seed,
        output_dir=_resolve_path(base, _expect(raw["output_dir"], "output_dir",
                                               str, "a path string")),
        kg=kg_block,
        embedding=embedding_block,
        nli=nli_block,
        roles=roles_block,
        questions_per_run=questions,
        runs=runs,
        threshold=threshold,
        weight_file=opt_path("weight_file"),
        max_concurrent_questions=concurrency,
        sample_batch_size=batch,
        max_sample_attempts=attempts,
        dok_variant=dok_variant,
        token_mode=token_mode,
        virtual_clock=virtual_clock,
        type_table=opt_path("type_table"),
        relation_table=opt_path("relation_table"),
        transport=transport_block,
    )


# -- runtime assembly ----------------------------------------------------------


def subject_cards_from_corpus(
    corpus: dict[str, MockEntity], table: TypeClassTable
) -> dict[str, SubjectCard]:
    """Build the mock subject's answer cards, keyed by entity label."""
    cards: dict[str, SubjectCard] = {}
    for entity in corpus.values():
        entry = table.entry(entity.type_id)
        if entry is None:
            continue
        verb = "was" if (
            entry.human and any(t.relation_id == DEATH_RELATION for t in entity.triples)
        ) else entry.tense.value
        facts: dict[str, tuple[str, str]] = {}
        for t in entity.triples:
            if t.kind != "unlabeled":
                facts.setdefault(t.relation_label.lower(), (t.relation_label, t.value))
        if entity.label in cards:
            raise ConfigError(
                f"corpus labels must be unique for the mock subject; {entity.label!r} repeats"
            )
        cards[entity.label] = SubjectCard(
            entity_id=entity.entity_id,
            label=entity.label,
            description=entity.description or f"{entity.label} has a modest public record.",
            verb=verb,
            facts=facts,
        )
    return cards


def _resolve_api_key(spec: dict[str, Any], where: str) -> str | None:
    env = spec.get("api_key_env")
    if env is None:
        return None
    value = os.environ.get(env)
    if not value:
        raise _fail(where, f"environment variable {env!r} is not set")
    return value


@dataclass
class Runtime:
    """Everything a run needs, assembled once from a validated config."""

    config: RunConfig
    table: TypeClassTable
    weights: WeightTable
    clock: Clock
    kg: KgClient
    subject: RoleBinding
    verifier: Verifier


class _TransportFactory:
    """Builds the shared HTTP transport lazily and applies fixture wrapping."""

    def __init__(self, block: dict[str, Any] | None, clock: Clock):
        self.mode = (block or {}).get("mode", "live")
        self.store = (
            FixtureStore((block or {})["fixture_dir"]) if self.mode != "live" else None
        )
        self.clock = clock
        self._http: HttpTransport | None = None

    def wrap(self, base: Transport) -> Transport:
        if self.mode == "record":
            return RecordingTransport(base, self.store)
        if self.mode == "replay":
            return ReplayTransport(self.store)
        return base

    def backend_transport(self) -> Transport:
        if self.mode == "replay":
            return ReplayTransport(self.store)
        if self._http is None:
            self._http = HttpTransport(clock=self.clock)
        return self.wrap(self._http)


def _build_kg(config: RunConfig, factory: _TransportFactory,
              table: TypeClassTable, clock: Clock) -> tuple[KgClient, dict[str, MockEntity] | None]:
    block = config.kg
    if "mock_corpus" in block:
        corpus = load_mock_corpus(block["mock_corpus"])
        return KgClient(MockKgTransport(corpus), MOCK_ENDPOINTS, table), corpus
    kwargs: dict[str, Any] = {
        key: block[key]
        for key in ("sparql_url", "action_api_url", "pageviews_url_template",
                    "description_url_template", "sample_query_template",
                    "subgraph_query_template", "sitelink_site",
                    "description_token_cap")
        if key in block
    }
    if "page_view_window" in block:
        kwargs["page_view_window"] = tuple(block["page_view_window"])
    try:
        endpoints = KgEndpoints(**kwargs)
    except ValueError as exc:
        raise _fail("kg", str(exc)) from exc
    if factory.mode == "replay":
        transport: Transport = CachingTransport(ReplayTransport(factory.store))
    else:
        limiter = RateLimiter(block.get("rate_limit_rps", 4.0), clock=clock)
        stack = RateLimitedTransport(HttpTransport(clock=clock), limiter)
        transport = CachingTransport(factory.wrap(stack))
    return KgClient(transport, endpoints, table), None


def _build_embedder(config: RunConfig, factory: _TransportFactory) -> EmbeddingBackend:
    block = config.embedding
    if block.get("mock") == "hash":
        return HashEmbeddingBackend(dimension=block.get("dimension", 48),
                                    seed=block.get("seed", 0))
    return HttpEmbeddingBackend(
        factory.backend_transport(),
        block["base_url"],
        block["model_id"],
        block["dimension"],
        api_key=_resolve_api_key(block, "embedding"),
        timeout=block.get("timeout"),
    )


def _build_nli(config: RunConfig, factory: _TransportFactory) -> NliBackend:
    block = config.nli
    if block.get("mock") == "rule":
        return RuleNliBackend()
    return HttpNliBackend(
        factory.backend_transport(),
        block["base_url"],
        api_key=_resolve_api_key(block, "nli"),
        timeout=block.get("timeout"),
    )


def _build_role(role: str, spec: dict[str, Any], factory: _TransportFactory,
                cards: dict[str, SubjectCard] | None) -> RoleBinding:
    mock = spec.get("mock")
    if mock is not None:
        backends: dict[str, ChatBackend] = {
            "abstention": MockAbstentionJudge(),
            "translator": MockTranslator(),
            "entailment": MockEntailmentJudge(),
            "expert": MockExpertJudge(),
        }
        if mock == "subject":
            if cards is None:
                raise _fail(f"roles.{role}", "mock 'subject' needs kg.mock_corpus")
            backend: ChatBackend = MockSubjectModel(cards)
        else:
            backend = backends[mock]
        return RoleBinding.with_defaults(role, backend, f"mock-{mock}")
    backend = HttpChatBackend(
        factory.backend_transport(),
        spec["base_url"],
        api_key=_resolve_api_key(spec, f"roles.{role}"),
        timeout=spec.get("timeout"),
    )
    return RoleBinding.with_defaults(
        role,
        backend,
        spec["model_id"],
        temperature=spec.get("temperature"),
        top_p=spec.get("top_p"),
        max_tokens=spec.get("max_tokens"),
    )


def build_runtime(config: RunConfig) -> Runtime:
    """Assemble backends, tables, and weights per the validated config."""
    clock: Clock = VirtualClock() if config.virtual_clock else Clock()
    default_type, default_relation = default_table_paths()
    table = load_type_class_table(config.type_table or default_type,
                                  config.relation_table or default_relation)
    weights = load_weight_table(config.weight_file)
    factory = _TransportFactory(config.transport, clock)
    kg_client, corpus = _build_kg(config, factory, table, clock)
    cards = subject_cards_from_corpus(corpus, table) if corpus is not None else None

    bindings = {
        role: _build_role(role, config.roles[role], factory, cards)
        for role in CHAT_ROLES
    }
    verifier = Verifier(
        abstention=bindings[role_defs.ABSTENTION_DETECTOR],
        translator=bindings[role_defs.FACT_TRANSLATOR],
        entailment=bindings[role_defs.LLM_ENTAILMENT],
        expert=bindings[role_defs.EXPERT],
        embedder=_build_embedder(config, factory),
        nli=_build_nli(config, factory),
        threshold=config.threshold,
        token_mode=config.token_mode,
    )
    return Runtime(
        config=config,
        table=table,
        weights=weights,
        clock=clock,
        kg=kg_client,
        subject=bindings[role_defs.EVALUATED_MODEL],
        verifier=verifier,
    )
