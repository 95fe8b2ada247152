"""
Dependency injection container for the solver services.

Services declare their collaborators as annotated constructor parameters;
the container builds them on first use and caches singletons.
"""

from typing import TypeVar, Type, Dict, Any, Optional, Callable, List
import inspect
import logging


T = TypeVar('T')


class SimpleContainer:
    """
    Constructor-injection container with singleton and factory support.
    """

    def __init__(self):
        """Initialize the container."""
        self._services: Dict[Type, Type] = {}
        self._factories: Dict[Type, Callable] = {}
        self._singletons: Dict[Type, Any] = {}
        self._singleton_flags: Dict[Type, bool] = {}
        self._logger = logging.getLogger(__name__)

    def register(self, interface: Type[T], implementation: Type[T], singleton: bool = True) -> None:
        """
        Register a concrete class for an interface.

        Args:
            interface: Abstract base or the class itself
            implementation: Class to instantiate
            singleton: Whether to cache the first instance
        """
        self._logger.debug(f"Registering {implementation.__name__} for {interface.__name__}")
        self._services[interface] = implementation
        self._singleton_flags[interface] = singleton

    def register_factory(self, interface: Type[T], factory: Callable[[], T], singleton: bool = True) -> None:
        self._logger.debug(f"Registering factory for {interface.__name__}")
        self._factories[interface] = factory
        self._singleton_flags[interface] = singleton

    def register_instance(self, interface: Type[T], instance: T) -> None:
        self._logger.debug(f"Registering instance for {interface.__name__}")
        self._singletons[interface] = instance
        self._singleton_flags[interface] = True

    def has_registration(self, interface: Type) -> bool:
        return (interface in self._services or
                interface in self._factories or
                interface in self._singletons)

    def resolve(self, interface: Type[T]) -> T:
        """
        Resolve a service instance.

        Unregistered concrete classes are built directly.

        Raises:
            ValueError: If the interface is abstract and unregistered
        """
        if interface in self._singletons:
            return self._singletons[interface]

        if interface in self._factories:
            self._logger.debug(f"Creating {interface.__name__} from factory")
            instance = self._factories[interface]()
        elif interface in self._services:
            instance = self._create_instance(self._services[interface])
        elif not inspect.isabstract(interface):
            return self._create_instance(interface)
        else:
            raise ValueError(f"No registration found for {interface.__name__}")

        if self._singleton_flags.get(interface, True):
            self._singletons[interface] = instance
        return instance

    def _create_instance(self, implementation: Type[T]) -> T:
        """
        Build ``implementation`` resolving each annotated constructor parameter.
        """
        signature = inspect.signature(implementation.__init__)
        params = {}

        for param_name, param in signature.parameters.items():
            if param_name == 'self' or param.kind in (param.VAR_POSITIONAL, param.VAR_KEYWORD):
                continue
            param_type = param.annotation
            if param_type is inspect.Parameter.empty or not inspect.isclass(param_type):
                if param.default is inspect.Parameter.empty:
                    raise ValueError(
                        f"Cannot inject '{param_name}' of {implementation.__name__}: no class annotation"
                    )
                continue
            if param.default is not inspect.Parameter.empty and not self.has_registration(param_type):
                continue
            params[param_name] = self.resolve(param_type)

        self._logger.debug(f"Creating {implementation.__name__}")
        return implementation(**params)

    def clear(self) -> None:
        """Clear all registrations and cached instances."""
        self._services.clear()
        self._factories.clear()
        self._singletons.clear()
        self._singleton_flags.clear()

    def get_registrations(self) -> Dict[str, List[str]]:
        """Summary of all registrations, by kind."""
        return {
            "services": [f"{k.__name__} -> {v.__name__}" for k, v in self._services.items()],
            "factories": [k.__name__ for k in self._factories.keys()],
            "singletons": [k.__name__ for k in self._singletons.keys()]
        }


# Global container instance
_container: Optional[SimpleContainer] = None


def get_container() -> SimpleContainer:
    """
    Get the global container instance.

    Returns:
        The global container
    """
    global _container
    if _container is None:
        _container = SimpleContainer()
    return _container


def configure_container() -> SimpleContainer:
    """
    Configure the dependency injection container with all services.

    Returns:
        Configured container instance
    """
    container = get_container()

    # Clear any existing registrations
    container.clear()

    # Register domain services
    from domain.services.kernel_domain_service import KernelDomainService
    from domain.services.maxent_domain_service import MaxEntropyDomainService
    from domain.services.maxent_oracle_service import MaxEntropyOracleService

    container.register_instance(KernelDomainService, KernelDomainService())
    container.register_instance(MaxEntropyDomainService, MaxEntropyDomainService())
    container.register(MaxEntropyOracleService, MaxEntropyOracleService)

    # Register application services
    from services.identification_service import IdentificationService
    from services.tuning_service import TuningService
    from services.simulation_service import SimulationService
    from services.verification_service import VerificationService

    container.register(IdentificationService, IdentificationService)
    container.register(TuningService, TuningService)
    container.register(SimulationService, SimulationService)
    container.register(VerificationService, VerificationService)

    # Register repositories
    from repositories.band_matrix_repository import BandMatrixRepository
    from repositories.dataset_repository import DatasetRepository, ImpulseResponseRepository

    container.register(BandMatrixRepository, BandMatrixRepository)
    container.register(DatasetRepository, DatasetRepository)
    container.register(ImpulseResponseRepository, ImpulseResponseRepository)

    # Register mappers
    from infrastructure.mappers.result_mapper import ResultMapper
    container.register_instance(ResultMapper, ResultMapper())

    return container
