from typing import Callable, Tuple, Union

import numpy as np


Number = Union[int, float]
Vector = np.ndarray
ValueAndGradient = Tuple[float, Vector]
Oracle = Callable[[Vector], ValueAndGradient]
