"""The task world: ontology, knowledge base, goals, action inventories and corpora."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..language import TemplateSet
from .acts import API_CALL, ActionVocabulary, flatten_act, split_act
from .corpus import CorpusError, Dialog, DialogCorpus, Turn, validate_corpus
from .goals import UserGoal, check_success, sample_goal
from .kb import ApiCall, KbEntity, KnowledgeBase, query_kb
from .ontology import DONTCARE, NONE, Ontology


@dataclass(frozen=True)
class Domain:
    ontology: Ontology
    kb: KnowledgeBase
    actions: ActionVocabulary
    agent_templates: TemplateSet
    user_templates: TemplateSet
    p_max: int = 10

    def check(self) -> None:
        self.kb.validate(self.ontology)
        slots = list(self.ontology.informable) + list(self.ontology.requestable)
        self.agent_templates.check_coverage(self.actions.agent, slots)
        self.user_templates.check_coverage(self.actions.user, slots)


FILES = {"ontology": "ontology.json", "kb": "kb.json", "actions": "actions.json",
         "agent_templates": "templates_agent.json", "user_templates": "templates_user.json"}


def load_domain(directory) -> Domain:
    d = Path(directory)
    dom = Domain(
        Ontology.load(d / FILES["ontology"]),
        KnowledgeBase.load(d / FILES["kb"]),
        ActionVocabulary.load(d / FILES["actions"]),
        TemplateSet.load(d / FILES["agent_templates"]),
        TemplateSet.load(d / FILES["user_templates"]),
    )
    dom.check()
    return dom


def save_domain(domain: Domain, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    domain.ontology.save(d / FILES["ontology"])
    domain.kb.save(d / FILES["kb"])
    domain.actions.save(d / FILES["actions"])
    domain.agent_templates.save(d / FILES["agent_templates"])
    domain.user_templates.save(d / FILES["user_templates"])


def synthetic_data_dir() -> Path:
    return Path(str(resources.files("dialogrl") / "data"))


def load_synthetic_domain() -> Domain:
    """The bundled restaurant domain (5 areas, 8 foods, 3 price ranges, 40 entities)."""
    return load_domain(synthetic_data_dir())


__all__ = [
    "API_CALL", "ActionVocabulary", "ApiCall", "CorpusError", "DONTCARE", "Dialog", "DialogCorpus",
    "Domain", "KbEntity", "KnowledgeBase", "NONE", "Ontology", "Turn", "UserGoal", "check_success",
    "flatten_act", "load_domain", "load_synthetic_domain", "query_kb", "sample_goal", "save_domain",
    "split_act", "synthetic_data_dir", "validate_corpus",
]
