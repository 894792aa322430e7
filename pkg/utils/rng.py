"""
Детерминированные независимые потоки случайных чисел
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


# Размер блока частиц с общим подпотоком; от числа потоков выполнения не зависит
BLOCK_SIZE = 4096


@dataclass(frozen=True)
class BlockStreams:
    """Подпотоки одного блока частиц"""
    phases: np.random.Generator
    displacement: np.random.Generator


def n_blocks(n_particles: int) -> int:
    """Число блоков для ансамбля из n_particles частиц"""
    return (n_particles + BLOCK_SIZE - 1) // BLOCK_SIZE


def block_bounds(block: int, n_particles: int) -> tuple[int, int]:
    """Диапазон индексов частиц [start, stop) блока"""
    start = block * BLOCK_SIZE
    return start, min(start + BLOCK_SIZE, n_particles)


def make_block_streams(master_seed: int, block: int) -> BlockStreams:
    """
    Создать независимые потоки для блока частиц

    Структура:
      seed
        └── block
              ├── phases        (переключения фаз, начальные фазы)
              └── displacement  (гауссовы смещения)

    Args:
        master_seed: Главное зерно ансамбля
        block: Номер блока

    Returns:
        BlockStreams: Генераторы блока
    """
    root = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(block),))
    ss_phases, ss_displacement = root.spawn(2)
    return BlockStreams(
        phases=np.random.default_rng(ss_phases),
        displacement=np.random.default_rng(ss_displacement),
    )


def make_rng(seed: int) -> np.random.Generator:
    """Генератор для одиночных траекторий и тестов"""
    return np.random.default_rng(np.random.SeedSequence(int(seed)))
