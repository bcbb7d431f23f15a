"""In-memory KG fixture serving the same wire formats as the live endpoints.

MockKgTransport implements the Transport protocol, so the real KgClient
parsing code runs unchanged against it. Use MOCK_ENDPOINTS as the matching
KgEndpoints configuration; its query templates are a compact dialect the
mock understands ("sample:{batch_size}:{seed}", "subgraph:{entity_id}").
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from kgfact.errors import ConfigError
from kgfact.kg.client import KgEndpoints
from kgfact.transport import TransportResponse
from kgfact.util import canonical_json

MOCK_ENDPOINTS = KgEndpoints(
    sparql_url="https://kg.test/sparql",
    action_api_url="https://kg.test/w/api.php",
    pageviews_url_template="https://stats.test/pageviews/{title}/monthly/{start}/{end}",
    description_url_template="https://wiki.test/page/summary/{title}",
    sample_query_template="sample:{batch_size}:{seed}",
    subgraph_query_template="subgraph:{entity_id}",
)


@dataclass(frozen=True)
class MockTriple:
    """One statement in the fixture KG.

    kind selects the wire shape: a plain literal, a labeled entity object,
    or an unlabeled entity object (served without a valueLabel so the
    client's raw-identifier fallback path is exercised).
    """

    relation_id: str
    relation_label: str
    value: str
    kind: str = "literal"

    def __post_init__(self):
        if self.kind not in ("literal", "entity", "unlabeled"):
            raise ValueError(f"unknown triple kind {self.kind!r}")


@dataclass
class MockEntity:
    """Fixture entity; None-valued fields simulate missing upstream data."""

    entity_id: str
    type_id: str
    label: str
    sitelink_title: str | None = None
    description: str | None = None
    monthly_views: list[int] | None = None
    site_links: int | None = None
    external_ids: int = 0
    linked_entities: int = 0
    statements: int | None = None
    references: int = 0
    triples: list[MockTriple] = field(default_factory=list)

    def __post_init__(self):
        if self.statements is not None and self.statements < self.external_ids + self.linked_entities:
            raise ValueError("statements must cover external_ids + linked_entities")
        if self.sitelink_title and self.site_links is not None and self.site_links < 1:
            raise ValueError("an entity with a sitelink title needs site_links >= 1")


def _json_response(payload, status: int = 200) -> TransportResponse:
    return TransportResponse(status=status, body=canonical_json(payload))


class MockKgTransport:
    """Serves a MockEntity corpus over the KgClient wire formats."""

    def __init__(self, entities: dict[str, MockEntity]):
        self.entities = dict(entities)
        self._by_title = {
            e.sitelink_title: e for e in self.entities.values() if e.sitelink_title
        }

    def request(self, method, url, *, params=None, json_body=None, headers=None, timeout=None):
        params = params or {}
        if url == MOCK_ENDPOINTS.sparql_url:
            return self._sparql(params.get("query", ""))
        if url == MOCK_ENDPOINTS.action_api_url:
            return self._action(params)
        if url.startswith("https://stats.test/pageviews/"):
            return self._pageviews(url)
        if url.startswith("https://wiki.test/page/summary/"):
            return self._summary(url)
        return TransportResponse(status=404, body="{}")

    # -- SPARQL -------------------------------------------------------------

    def _sparql(self, query: str) -> TransportResponse:
        if query.startswith("sample:"):
            _, batch_size, seed = query.split(":", 2)
            return self._sample(int(batch_size), seed)
        if query.startswith("subgraph:"):
            return self._subgraph(query.split(":", 1)[1])
        return TransportResponse(status=400, body="unrecognized query")

    def _sample(self, batch_size: int, seed: str) -> TransportResponse:
        def sort_key(entity_id: str) -> str:
            return hashlib.md5(f"{entity_id}:{seed}".encode()).hexdigest()

        ordered = sorted(self.entities, key=sort_key)[:batch_size]
        bindings = [
            {
                "entity": {"type": "uri", "value": f"https://kg.test/entity/{eid}"},
                "type": {
                    "type": "uri",
                    "value": f"https://kg.test/entity/{self.entities[eid].type_id}",
                },
                "entityLabel": {"type": "literal", "value": self.entities[eid].label},
            }
            for eid in ordered
        ]
        return _json_response({"results": {"bindings": bindings}})

    def _subgraph(self, entity_id: str) -> TransportResponse:
        entity = self.entities.get(entity_id)
        if entity is None:
            return _json_response({"results": {"bindings": []}})
        bindings = []
        for t in entity.triples:
            row = {
                "prop": {"type": "uri", "value": f"https://kg.test/prop/{t.relation_id}"},
                "propLabel": {"type": "literal", "value": t.relation_label},
            }
            if t.kind == "literal":
                row["value"] = {"type": "literal", "value": t.value}
            elif t.kind == "entity":
                # Synthetic object id, distinct from the label, so the
                # client takes its labeled-entity path.
                digest = hashlib.md5(f"{entity_id}:{t.relation_id}:{t.value}".encode())
                object_id = f"Q{int(digest.hexdigest()[:7], 16)}"
                row["value"] = {"type": "uri", "value": f"https://kg.test/entity/{object_id}"}
                row["valueLabel"] = {"type": "literal", "value": t.value}
            else:
                row["value"] = {"type": "uri", "value": f"https://kg.test/entity/{t.value}"}
            bindings.append(row)
        return _json_response({"results": {"bindings": bindings}})

    # -- action API -----------------------------------------------------------

    def _action(self, params: dict) -> TransportResponse:
        if params.get("action") != "wbgetentities":
            return TransportResponse(status=400, body="unsupported action")
        entity_id = params.get("ids", "")
        entity = self.entities.get(entity_id)
        if entity is None:
            return _json_response({"entities": {entity_id: {"missing": ""}}})
        body: dict = {"id": entity_id}
        if entity.statements is not None:
            body["claims"] = self._claims(entity)
        if entity.site_links is not None:
            body["sitelinks"] = self._sitelinks(entity)
        return _json_response({"entities": {entity_id: body}})

    @staticmethod
    def _claims(entity: MockEntity) -> dict:
        claims = []
        for i in range(entity.statements):
            if i < entity.external_ids:
                mainsnak = {
                    "snaktype": "value",
                    "datatype": "external-id",
                    "datavalue": {"type": "string", "value": f"EXT{i}"},
                }
            elif i < entity.external_ids + entity.linked_entities:
                mainsnak = {
                    "snaktype": "value",
                    "datatype": "wikibase-item",
                    "datavalue": {"type": "wikibase-entityid", "value": {"id": f"Q{9000 + i}"}},
                }
            else:
                mainsnak = {
                    "snaktype": "value",
                    "datatype": "string",
                    "datavalue": {"type": "string", "value": f"v{i}"},
                }
            claims.append({"mainsnak": mainsnak})
        if claims:
            for j in range(entity.references):
                claims[j % len(claims)].setdefault("references", []).append({"hash": f"h{j}"})
        return {f"P{9000 + i}": [claim] for i, claim in enumerate(claims)}

    @staticmethod
    def _sitelinks(entity: MockEntity) -> dict:
        links = {}
        if entity.sitelink_title:
            links["enwiki"] = {"site": "enwiki", "title": entity.sitelink_title}
        for i in range(max(0, entity.site_links - len(links))):
            links[f"xx{i}wiki"] = {"site": f"xx{i}wiki", "title": entity.label or entity.entity_id}
        return links

    # -- REST ------------------------------------------------------------------

    def _pageviews(self, url: str) -> TransportResponse:
        title = url.removeprefix("https://stats.test/pageviews/").split("/", 1)[0]
        entity = self._by_title.get(title.replace("_", " ")) or self._by_title.get(title)
        if entity is None or entity.monthly_views is None:
            return TransportResponse(status=404, body="{}")
        return _json_response({"items": [{"views": v} for v in entity.monthly_views]})

    def _summary(self, url: str) -> TransportResponse:
        title = url.removeprefix("https://wiki.test/page/summary/")
        entity = self._by_title.get(title.replace("_", " ")) or self._by_title.get(title)
        if entity is None or entity.description is None:
            return TransportResponse(status=404, body="{}")
        return _json_response({"title": title, "extract": entity.description})


_ENTITY_FIELDS = {f.name for f in fields(MockEntity)}


def load_mock_corpus(path: str | Path) -> dict[str, MockEntity]:
    """Load a fixture corpus: {"entities": [MockEntity fields, triples inline]}."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read corpus {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"corpus {path} is not valid JSON: {exc}") from exc
    rows = payload.get("entities") if isinstance(payload, dict) else None
    if not isinstance(rows, list):
        raise ConfigError(f"corpus {path} must be an object with an 'entities' array")
    entities: dict[str, MockEntity] = {}
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise ConfigError(f"corpus {path} entities[{i}] must be an object")
        unknown = set(row) - _ENTITY_FIELDS
        if unknown:
            raise ConfigError(f"corpus {path} entities[{i}] has unknown fields {sorted(unknown)}")
        triples = [
            MockTriple(**t) if isinstance(t, dict) else t for t in row.get("triples", [])
        ]
        try:
            entity = MockEntity(**{**row, "triples": triples})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"corpus {path} entities[{i}]: {exc}") from exc
        if entity.entity_id in entities:
            raise ConfigError(f"corpus {path} repeats entity {entity.entity_id}")
        entities[entity.entity_id] = entity
    if not entities:
        raise ConfigError(f"corpus {path} has no entities")
    return entities
