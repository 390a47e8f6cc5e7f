"""Seeded random substreams owned by the trainer."""

import hashlib
import logging
from collections import Counter

import torch

logger = logging.getLogger(__name__)


def derive_seed(seed: int, name: str) -> int:
    """Derive a stable 63-bit seed for a named substream."""
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big") & ((1 << 63) - 1)


class RngStreams:
    """
    One base seed fanned out into independent named torch generators.

    Toggling one component (e.g. disabling triples sampling) never shifts
    another component's stream, so ablations stay comparable.
    """

    def __init__(self, seed: int):
        self.seed = seed
        self._generators: dict[str, torch.Generator] = {}
        self._draws: Counter[str] = Counter()

    def get(self, name: str) -> torch.Generator:
        """Get the generator of a named stream, creating it on first use."""
        if name not in self._generators:
            generator = torch.Generator()
            generator.manual_seed(derive_seed(self.seed, name))
            self._generators[name] = generator
        return self._generators[name]

    def draw(self, name: str) -> tuple[torch.Generator, int]:
        """Get a stream and the index of this draw (used to tag random views)."""
        index = self._draws[name]
        self._draws[name] += 1
        return self.get(name), index

    def state_dict(self) -> dict:
        """Snapshot all generator states and draw counters."""
        return {
            "seed": self.seed,
            "states": {name: g.get_state() for name, g in self._generators.items()},
            "draws": dict(self._draws),
        }

    def load_state_dict(self, state: dict) -> None:
        """Restore a snapshot produced by state_dict."""
        self.seed = state["seed"]
        self._generators = {}
        for name, generator_state in state["states"].items():
            self.get(name).set_state(generator_state)
        self._draws = Counter(state["draws"])
        logger.debug(f"Restored rng streams: {sorted(self._generators)}")
