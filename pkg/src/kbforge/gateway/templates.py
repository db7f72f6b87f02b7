"""Prompt templates and the versioned structured-output schema registry.

Every LLM call in the pipeline goes through one of the templates below.
Templates bind a system prompt, a user-message format, and the schema id
the reply must validate against. A payload that fails validation against
the requested schema version is a parse failure, never a crash.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import jsonschema

from kbforge.errors import TemplateError
from kbforge.model import ParseStatus


class TemplateId(str, Enum):
    ELICIT = "elicit"
    NER = "ner"
    TAXO_SEED = "taxo_seed"
    TAXO_SCORE = "taxo_score"
    TAXO_SUPERCLASS = "taxo_superclass"
    TAXO_UPDATE = "taxo_update"
    ENTAIL_ENTITY = "entail_entity"
    ENTAIL_TRIPLE = "entail_triple"


@dataclass(frozen=True)
class PromptTemplate:
    template_id: TemplateId
    system: str
    user_format: str
    placeholders: tuple[str, ...]
    schema_id: str


_ELICIT_SYSTEM = """\
You are a knowledge base construction expert. Given a subject entity, return all facts that you know for the subject as a list of subject, predicate, object triples. The number of facts may be very high, between 50 to 100 or more, for very popular subjects. For less popular subjects, the number of facts can be very low, like 5 or 10.

Important:
- If you don't know the subject, return an empty list.
- If the subject is not a named entity, return an empty list.
- If the subject is a named entity, include at least one triple where predicate is "instanceOf".
- Do not get too wordy.
- Separate several objects into multiple triples with one object."""

_NER_SYSTEM = """\
You are an expert on named entity recognition (NER). Your task is to classify if given phrases are named entities (e.g., persons, organizations, works of art), or not (e.g., literals, dates, URLs, verbose phrases). Each phrase is given to you in a line."""

_TAXO_SEED_SYSTEM = """\
You are a knowledge base construction expert. Your task is to initialize a seed taxonomy with general categories, which you will update later with given classes. Please return only the seed taxonomy in json form with indentation."""

_TAXO_SCORE_SYSTEM = """\
You are a knowledge base construction expert. Your task is to create a taxonomy for a knowledge base. Beforehand, you need to give each given class a score describing how general it is. The score is an integer ranging only from 1, for the most general concept, to 10, for the most specific concept. Please return only the score of the given class."""

_TAXO_SUPERCLASS_SYSTEM = """\
You are a knowledge base construction expert. Your task is to integrate a given class into the taxonomy. If the given class is a subclass of one of the candidate branches, return only the exact name of that branch. Otherwise, return only NULL."""

_TAXO_UPDATE_SYSTEM = """\
You are a knowledge base construction expert. Your task is to update the given taxonomy with the given class. You can consider the categorization of the taxonomy, but you can not modify the names of the classes in the taxonomy. Please return only the updated taxonomy in JSON form."""

_ENTAIL_ENTITY_SYSTEM = """\
You are a strict verification judge. You will be given an entity name and numbered web search snippets. Decide, from the snippets alone, whether the entity exists: answer "verifiable" if the snippets clearly refer to it, "plausible" if they are suggestive but not conclusive, and "unverifiable" if they give no support. Do not use any knowledge of your own that is not in the snippets."""

_ENTAIL_TRIPLE_SYSTEM = """\
You are a strict verification judge. You will be given a factual claim and numbered web search snippets. Decide, from the snippets alone, whether the claim holds: answer "entailed" if the snippets state it, "plausible" if they suggest it without stating it, "implausible" if they make it unlikely, and "false" if they contradict it. Do not use any knowledge of your own that is not in the snippets."""


_TEMPLATES: dict[TemplateId, PromptTemplate] = {
    t.template_id: t
    for t in (
        PromptTemplate(TemplateId.ELICIT, _ELICIT_SYSTEM, "Subject: {subject}", ("subject",), "triples.v1"),
        PromptTemplate(TemplateId.NER, _NER_SYSTEM, "{phrases}", ("phrases",), "ner.v1"),
        PromptTemplate(TemplateId.TAXO_SEED, _TAXO_SEED_SYSTEM, "", (), "taxonomy.v1"),
        PromptTemplate(TemplateId.TAXO_SCORE, _TAXO_SCORE_SYSTEM, "Class: {class_name}", ("class_name",), "score.v1"),
        PromptTemplate(
            TemplateId.TAXO_SUPERCLASS,
            _TAXO_SUPERCLASS_SYSTEM,
            "Candidate branches: {branches}\nClass: {class_name}",
            ("branches", "class_name"),
            "choice.v1",
        ),
        PromptTemplate(
            TemplateId.TAXO_UPDATE,
            _TAXO_UPDATE_SYSTEM,
            "Taxonomy: {taxonomy}\nClass: {class_name}",
            ("taxonomy", "class_name"),
            "taxonomy.v1",
        ),
        PromptTemplate(
            TemplateId.ENTAIL_ENTITY,
            _ENTAIL_ENTITY_SYSTEM,
            "Entity: {label}\nSnippets:\n{snippets}",
            ("label", "snippets"),
            "verdict_entity.v1",
        ),
        PromptTemplate(
            TemplateId.ENTAIL_TRIPLE,
            _ENTAIL_TRIPLE_SYSTEM,
            "Claim: {claim}\nSnippets:\n{snippets}",
            ("claim", "snippets"),
            "verdict_triple.v1",
        ),
    )
}

_TAXONOMY_NODE_DEFS = {
    "node": {
        "type": "object",
        "properties": {
            "name": {"type": "string"},
            "children": {"type": "array", "items": {"$ref": "#/$defs/node"}},
        },
        "required": ["name", "children"],
        "additionalProperties": False,
    }
}

SCHEMAS: dict[str, dict] = {
    "triples.v1": {
        "$id": "triples.v1",
        "type": "object",
        "properties": {
            "triples": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "subject": {"type": "string"},
                        "predicate": {"type": "string"},
                        "object": {"type": "string"},
                    },
                    "required": ["subject", "predicate", "object"],
                    "additionalProperties": False,
                },
            }
        },
        "required": ["triples"],
        "additionalProperties": False,
    },
    "ner.v1": {
        "$id": "ner.v1",
        "type": "object",
        "properties": {
            "verdicts": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "phrase": {"type": "string"},
                        "is_named_entity": {"type": "boolean"},
                    },
                    "required": ["phrase", "is_named_entity"],
                    "additionalProperties": False,
                },
            }
        },
        "required": ["verdicts"],
        "additionalProperties": False,
    },
    "taxonomy.v1": {
        "$id": "taxonomy.v1",
        "type": "object",
        "properties": {"root": {"$ref": "#/$defs/node"}},
        "required": ["root"],
        "additionalProperties": False,
        "$defs": _TAXONOMY_NODE_DEFS,
    },
    "score.v1": {
        "$id": "score.v1",
        "type": "object",
        "properties": {"score": {"type": "integer"}},
        "required": ["score"],
        "additionalProperties": False,
    },
    "choice.v1": {
        "$id": "choice.v1",
        "type": "object",
        "properties": {"choice": {"type": "string"}},
        "required": ["choice"],
        "additionalProperties": False,
    },
    "verdict_entity.v1": {
        "$id": "verdict_entity.v1",
        "type": "object",
        "properties": {"verdict": {"enum": ["verifiable", "plausible", "unverifiable"]}},
        "required": ["verdict"],
        "additionalProperties": False,
    },
    "verdict_triple.v1": {
        "$id": "verdict_triple.v1",
        "type": "object",
        "properties": {"verdict": {"enum": ["entailed", "plausible", "implausible", "false"]}},
        "required": ["verdict"],
        "additionalProperties": False,
    },
}

_VALIDATORS = {sid: jsonschema.Draft202012Validator(schema) for sid, schema in SCHEMAS.items()}


@dataclass
class PromptRequest:
    request_id: str
    template_id: TemplateId
    variables: Mapping[str, str] = field(default_factory=dict)
    schema_id: str = ""

    def __post_init__(self) -> None:
        if self.template_id not in _TEMPLATES:
            raise TemplateError(f"unknown template {self.template_id!r}")
        if not self.schema_id:
            self.schema_id = _TEMPLATES[self.template_id].schema_id


@dataclass
class StructuredResponse:
    request_id: str
    payload: Any
    parse_status: ParseStatus
    model_id: str = ""
    tokens_in: int = 0
    tokens_out: int = 0

    @property
    def ok(self) -> bool:
        return self.parse_status is ParseStatus.OK


def request_for(request_id: str, template_id: TemplateId, **variables: str) -> PromptRequest:
    return PromptRequest(request_id=request_id, template_id=template_id, variables=variables)


def get_template(template_id: TemplateId) -> PromptTemplate:
    try:
        return _TEMPLATES[template_id]
    except KeyError:
        raise TemplateError(f"unknown template {template_id!r}") from None


def render(template_id: TemplateId, variables: Mapping[str, str]) -> tuple[str, str]:
    """Render (system, user) message texts, checking placeholder coverage."""
    tpl = get_template(template_id)
    missing = [p for p in tpl.placeholders if p not in variables]
    if missing:
        raise TemplateError(f"template {template_id.value}: missing variables {missing}")
    user = tpl.user_format.format(**{p: variables[p] for p in tpl.placeholders})
    return tpl.system, user


def schema_registered(schema_id: str) -> bool:
    return schema_id in _VALIDATORS


def validate_payload(schema_id: str, payload: Any) -> bool:
    """True when payload conforms to the registered schema version."""
    validator = _VALIDATORS.get(schema_id)
    if validator is None:
        raise TemplateError(f"unknown schema {schema_id!r}")
    return validator.is_valid(payload)


def payload_is_empty(schema_id: str, payload: Any) -> bool:
    """Empty means no content to act on, distinct from malformed."""
    if payload is None:
        return True
    if schema_id == "triples.v1":
        return len(payload.get("triples", ())) == 0
    return False
