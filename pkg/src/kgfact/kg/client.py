"""Knowledge-graph access: sampling, subgraphs, statistics, descriptions.

The client speaks three wire dialects: SPARQL JSON results for sampling and
one-hop subgraphs, an action API for claims/sitelinks, and REST endpoints
for monthly page views and article extracts. All URLs and query templates
come from KgEndpoints, so tests point the same parsing code at a fixture
transport.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

from kgfact.errors import (
    DescriptionMissing,
    EndpointUnavailable,
    EntityNotFound,
    MalformedResponse,
)
from kgfact.kg.types import INCOMPLETE, EntityRecord, EntityStatistics, KGTriple, _Incomplete
from kgfact.transport import Transport, TransportFailure

if TYPE_CHECKING:
    # Annotation-only; a module-level import would be circular through
    # kgfact.tables -> kgfact.kg.types -> this module.
    from kgfact.tables import TypeClassTable

DEFAULT_SAMPLE_QUERY = (
    "SELECT ?entity ?type ?entityLabel WHERE {{ "
    "SERVICE bd:sample {{ ?entity wdt:P31 ?type . bd:serviceParam bd:sample.limit {batch_size} . "
    'bd:serviceParam bd:sample.seed "{seed}" . }} '
    'SERVICE wikibase:label {{ bd:serviceParam wikibase:language "en". }} }}'
)

DEFAULT_SUBGRAPH_QUERY = (
    "SELECT ?prop ?propLabel ?value ?valueLabel WHERE {{ "
    "wd:{entity_id} ?p ?value . ?prop wikibase:directClaim ?p . "
    'SERVICE wikibase:label {{ bd:serviceParam wikibase:language "en". }} }}'
)


@dataclass(frozen=True)
class KgEndpoints:
    """Endpoint URLs, query templates, and retrieval windows."""

    sparql_url: str
    action_api_url: str
    pageviews_url_template: str
    description_url_template: str
    sample_query_template: str = DEFAULT_SAMPLE_QUERY
    subgraph_query_template: str = DEFAULT_SUBGRAPH_QUERY
    page_view_window: tuple[str, str] = ("2017-01", "2025-12")
    sitelink_site: str = "enwiki"
    description_token_cap: int = 1000

    def __post_init__(self):
        start, end = self.page_view_window
        if not (len(start) == 7 and len(end) == 7 and start <= end):
            raise ValueError("page_view_window must be an inclusive YYYY-MM range")
        if self.description_token_cap < 1:
            raise ValueError("description_token_cap must be positive")


def _uri_tail(uri: str) -> str:
    return uri.rstrip("/").rsplit("/", 1)[-1]


class KgClient:
    """Read-only KG client; share one instance across question pipelines."""

    def __init__(self, transport: Transport, endpoints: KgEndpoints, table: TypeClassTable):
        self.transport = transport
        self.endpoints = endpoints
        self.table = table

    # -- low-level fetch helpers -------------------------------------------

    def _get_json(self, url: str, params: dict[str, Any] | None = None) -> tuple[int, Any]:
        try:
            resp = self.transport.request("GET", url, params=params)
        except TransportFailure as exc:
            raise EndpointUnavailable(str(exc)) from exc
        if resp.status == 404:
            return 404, None
        if resp.status != 200:
            raise MalformedResponse(f"HTTP {resp.status} from {url}")
        try:
            return 200, json.loads(resp.body)
        except json.JSONDecodeError as exc:
            raise MalformedResponse(f"non-JSON body from {url}: {exc}") from exc

    def _sparql(self, query: str) -> list[dict[str, Any]]:
        status, payload = self._get_json(
            self.endpoints.sparql_url, params={"query": query, "format": "json"}
        )
        if status == 404:
            raise MalformedResponse("SPARQL endpoint returned 404")
        try:
            bindings = payload["results"]["bindings"]
        except (KeyError, TypeError) as exc:
            raise MalformedResponse(f"SPARQL result missing results.bindings: {exc}") from exc
        if not isinstance(bindings, list):
            raise MalformedResponse("SPARQL bindings is not a list")
        return bindings

    # -- operations ---------------------------------------------------------

    def sample_random_entities(self, batch_size: int, rng_seed: int) -> list[EntityRecord]:
        """Random entity ids and types; classes resolved against the type table."""
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        query = self.endpoints.sample_query_template.format(batch_size=batch_size, seed=rng_seed)
        bindings = self._sparql(query)
        if len(bindings) < batch_size:
            raise MalformedResponse(
                f"sample returned {len(bindings)} entities, need {batch_size}"
            )
        records = []
        for row in bindings[:batch_size]:
            try:
                entity_id = _uri_tail(row["entity"]["value"])
                type_id = _uri_tail(row["type"]["value"])
            except (KeyError, TypeError) as exc:
                raise MalformedResponse(f"sample row missing entity/type: {exc}") from exc
            label = row.get("entityLabel", {}).get("value", "")
            records.append(
                EntityRecord(
                    entity_id=entity_id,
                    type_id=type_id,
                    type_class=self.table.resolve_class(type_id),
                    label=label,
                )
            )
        return records

    def fetch_subgraph_triples(self, entity_id: str) -> list[KGTriple]:
        """All one-hop (relation, object) pairs, objects rendered as text.

        Entity-valued objects render by label when one exists; unlabeled
        objects fall back to their raw identifier and are marked
        non-textual so downstream filtering can drop them.
        """
        if not entity_id:
            raise ValueError("entity_id must be non-empty")
        query = self.endpoints.subgraph_query_template.format(entity_id=entity_id)
        bindings = self._sparql(query)
        if not bindings:
            raise EntityNotFound(f"no one-hop statements for {entity_id}")
        triples = []
        for row in bindings:
            try:
                relation_id = _uri_tail(row["prop"]["value"])
                relation_label = row.get("propLabel", {}).get("value", relation_id)
                value = row["value"]
            except (KeyError, TypeError) as exc:
                raise MalformedResponse(f"subgraph row missing prop/value: {exc}") from exc
            if value.get("type") == "uri":
                tail = _uri_tail(value.get("value", ""))
                label = row.get("valueLabel", {}).get("value", "")
                if label and label != tail:
                    fact_value, textual = label, True
                else:
                    fact_value, textual = tail, False
            else:
                fact_value, textual = str(value.get("value", "")), True
            if not fact_value:
                continue
            triples.append(
                KGTriple(
                    relation_id=relation_id,
                    relation_label=relation_label,
                    fact_value=fact_value,
                    textual=textual,
                )
            )
        return triples

    def _fetch_entity_data(self, entity_id: str) -> dict[str, Any]:
        status, payload = self._get_json(
            self.endpoints.action_api_url,
            params={
                "action": "wbgetentities",
                "ids": entity_id,
                "props": "claims|sitelinks",
                "format": "json",
            },
        )
        if status == 404 or payload is None:
            raise EntityNotFound(f"entity data endpoint has no record of {entity_id}")
        entity = payload.get("entities", {}).get(entity_id)
        if entity is None or "missing" in entity:
            raise EntityNotFound(f"no entity {entity_id}")
        return entity

    def _sitelink_title(self, entity: dict[str, Any]) -> str | None:
        sitelinks = entity.get("sitelinks")
        if not isinstance(sitelinks, dict):
            return None
        link = sitelinks.get(self.endpoints.sitelink_site)
        if not isinstance(link, dict) or not link.get("title"):
            return None
        return str(link["title"])

    def _fetch_page_views(self, title: str) -> int | None:
        start, end = self.endpoints.page_view_window
        url = self.endpoints.pageviews_url_template.format(
            title=title.replace(" ", "_"),
            start=start.replace("-", "") + "01",
            end=end.replace("-", "") + "01",
        )
        status, payload = self._get_json(url)
        if status == 404:
            return None
        items = payload.get("items") if isinstance(payload, dict) else None
        if not isinstance(items, list):
            raise MalformedResponse("pageviews payload missing items list")
        total = 0
        for item in items:
            views = item.get("views")
            if not isinstance(views, int) or views < 0:
                return None
            total += views
        return total

    def _fetch_extract(self, title: str) -> str | None:
        url = self.endpoints.description_url_template.format(title=title.replace(" ", "_"))
        status, payload = self._get_json(url)
        if status == 404:
            return None
        extract = payload.get("extract") if isinstance(payload, dict) else None
        if not isinstance(extract, str) or not extract.strip():
            return None
        return extract

    def fetch_statistics(self, entity_id: str) -> EntityStatistics | _Incomplete:
        """All seven popularity statistics, or INCOMPLETE when any is absent.

        Zero is a valid value everywhere; only absent or negative values
        make the entity unusable.
        """
        entity = self._fetch_entity_data(entity_id)
        claims = entity.get("claims")
        sitelinks = entity.get("sitelinks")
        if not isinstance(claims, dict) or not isinstance(sitelinks, dict):
            return INCOMPLETE

        statements = 0
        external_ids = 0
        linked_entities = 0
        references = 0
        for claim_list in claims.values():
            if not isinstance(claim_list, list):
                return INCOMPLETE
            for claim in claim_list:
                statements += 1
                mainsnak = claim.get("mainsnak", {})
                if mainsnak.get("datatype") == "external-id":
                    external_ids += 1
                datavalue = mainsnak.get("datavalue", {})
                if isinstance(datavalue, dict) and datavalue.get("type") == "wikibase-entityid":
                    linked_entities += 1
                references += len(claim.get("references", []))

        title = self._sitelink_title(entity)
        if title is None:
            return INCOMPLETE
        page_views = self._fetch_page_views(title)
        if page_views is None:
            return INCOMPLETE
        extract = self._fetch_extract(title)
        if extract is None:
            return INCOMPLETE

        return EntityStatistics(
            page_views=page_views,
            site_links=len(sitelinks),
            linked_entities=linked_entities,
            external_ids=external_ids,
            wiki_token_count=len(extract.split()),
            statements=statements,
            references=references,
        )

    def fetch_description(self, entity_id: str) -> str:
        """Whitespace-normalized article text, truncated to the token cap."""
        entity = self._fetch_entity_data(entity_id)
        title = self._sitelink_title(entity)
        if title is None:
            raise DescriptionMissing(f"{entity_id} has no {self.endpoints.sitelink_site} article")
        extract = self._fetch_extract(title)
        if extract is None:
            raise DescriptionMissing(f"no article extract for {entity_id} ({title})")
        tokens = extract.split()
        return " ".join(tokens[: self.endpoints.description_token_cap])
