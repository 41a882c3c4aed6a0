from kpriorpy.memory.selection import (
    MemorySet,
    multiclass_score,
    select_memorable,
    select_memory,
    select_random,
)
