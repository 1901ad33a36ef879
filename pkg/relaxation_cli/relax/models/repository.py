from typing import Any, Dict, Optional, Type

from pydantic import BaseModel

from relaxation_cli.relax.core import ModelSystem
from relaxation_cli.relax.exceptions import ModelNotRegistered


class ModelParams(BaseModel):
    """Parameter map of a model family; every field has a default fixture value."""

    class Config:
        extra = "forbid"
        allow_mutation = False


class ModelRepository:
    instance: "ModelRepository"

    def __init__(self):
        self.models: Dict[str, Type[ModelSystem]] = {}

    @classmethod
    def set_instance(cls, _instance: "ModelRepository"):
        cls.instance = _instance

    @classmethod
    def get_instance(cls) -> "ModelRepository":
        return cls.instance

    def register_model(self, _class: Type[ModelSystem]):
        self.models[_class.get_name()] = _class

    def get_model(self, name: str) -> Type[ModelSystem]:
        model_class = self.models.get(name)
        if not model_class:
            raise ModelNotRegistered(name)
        return model_class

    def list_models(self) -> Dict[str, Type[ModelSystem]]:
        return self.models

    def parse_params(self, family: str, params: Optional[Dict[str, Any]] = None) -> ModelParams:
        return self.get_model(family).Params(**(params or {}))

    def build(self, family: str, params: Optional[Dict[str, Any]] = None) -> ModelSystem:
        model_class = self.get_model(family)
        return model_class.from_params(self.parse_params(family, params))
