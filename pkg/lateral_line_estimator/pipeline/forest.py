# Copyright The lateral-line-estimator Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Random forest regression with out-of-bag tracking and permutation importance.

Each tree is grown on a bootstrap of the training set. At every node a random
subset of m_try features is searched exhaustively for the threshold that
minimizes the summed squared error of the two children. Samples left out of a
tree's bootstrap form its out-of-bag (OOB) set, used for the OOB error curve
and for permutation importance.
"""

import numpy as np
from ..consts import DEFAULT_MIN_NODE_SIZE, DEFAULT_N_TREES, MODEL_FORMAT_VERSION
from ..errors import ArgumentError, DegenerateBootstrapError, SchemaError
from ..models import ImportanceReport, SensorId
from .dataset import SampleSet
from .parallel import parallel_map
from dataclasses import dataclass, field
from loguru import logger
from typing import Any, Dict, List, Optional, Tuple


LEAF = -1


def default_m_try(m: int) -> int:
    """Features drawn per split: M/3 rounded, at least 1."""
    return max(1, int(round(m / 3)))


def bootstrap_rows(seed: int, tree_index: int, n: int) -> Tuple[np.ndarray, np.ndarray, Any]:
    """Bootstrap rows, OOB rows and the generator that goes on to grow the tree."""
    rng = np.random.default_rng([seed, tree_index])
    rows = rng.integers(0, n, size=n)
    oob = np.setdiff1d(np.arange(n), rows)
    return rows, oob, rng


@dataclass(frozen=True)
class RegressionTree:
    """A fitted regression tree stored as flat node arrays.

    Node 0 is the root. Internal nodes send ``x[feature] <= threshold`` to
    ``left``, the rest to ``right``; leaves have ``feature == -1`` and
    predict ``value``.

    Attributes:
        index: Position of the tree in its forest.
        feature: Split feature per node, -1 for leaves.
        threshold: Split threshold per node.
        left: Left child per node.
        right: Right child per node.
        value: Mean training label per node.
        bootstrap: Bootstrap rows the tree was grown on.
        oob: Training rows absent from the bootstrap.
    """

    index: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    bootstrap: np.ndarray = field(repr=False)
    oob: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        """Node count."""
        return self.feature.size

    @property
    def n_leaves(self) -> int:
        """Leaf count."""
        return int(np.sum(self.feature == LEAF))

    def apply(self, features: np.ndarray) -> np.ndarray:
        """Leaf reached by every row."""
        node = np.zeros(features.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            current = node[active]
            go_left = features[active, self.feature[current]] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Prediction for every row."""
        return self.value[self.apply(features)]


def _best_split(
    features: np.ndarray, labels: np.ndarray, candidates: np.ndarray
) -> Optional[Tuple[int, float]]:
    """Feature and midpoint threshold minimizing the children's summed squared error."""
    n = labels.size
    centered = labels - labels.mean()
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    best_sse, best = np.inf, None
    for k in np.sort(candidates):
        order = np.argsort(features[:, k], kind='stable')
        x = features[order, k]
        valid = x[:-1] < x[1:]
        if not valid.any():
            continue
        y = centered[order]
        cs, cs2 = np.cumsum(y), np.cumsum(y * y)
        s, s2 = cs[:-1], cs2[:-1]
        total, total2 = cs[-1], cs2[-1]
        sse = (s2 - s**2 / n_left) + ((total2 - s2) - (total - s) ** 2 / n_right)
        sse = np.where(valid, sse, np.inf)
        j = int(np.argmin(sse))
        if sse[j] < best_sse:
            threshold = 0.5 * (x[j] + x[j + 1])
            if not x[j] <= threshold < x[j + 1]:
                threshold = x[j]
            best_sse, best = sse[j], (int(k), float(threshold))
    return best


def grow_tree(
    features: np.ndarray,
    labels: np.ndarray,
    seed: int,
    tree_index: int,
    m_try: int,
    min_node_size: int = DEFAULT_MIN_NODE_SIZE,
) -> RegressionTree:
    """Grow one tree on its bootstrap of (features, labels)."""
    n, m = features.shape
    rows, oob, rng = bootstrap_rows(seed, tree_index, n)
    feature: List[int] = [LEAF]
    threshold: List[float] = [0.0]
    left: List[int] = [LEAF]
    right: List[int] = [LEAF]
    value: List[float] = [0.0]
    stack = [(0, rows)]
    while stack:
        node, idx = stack.pop()
        y = labels[idx]
        value[node] = float(y.mean())
        if idx.size < min_node_size or np.all(y == y[0]):
            continue
        candidates = rng.choice(m, size=m_try, replace=False)
        split = _best_split(features[idx], y, candidates)
        if split is None:
            continue
        k, t = split
        mask = features[idx, k] <= t
        children = []
        for _ in range(2):
            children.append(len(feature))
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            value.append(0.0)
        feature[node], threshold[node] = k, t
        left[node], right[node] = children
        stack.append((children[1], idx[~mask]))
        stack.append((children[0], idx[mask]))
    return RegressionTree(
        index=tree_index,
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        bootstrap=rows,
        oob=oob,
    )


@dataclass(frozen=True)
class Forest:
    """A fitted random forest.

    Attributes:
        trees: Fitted trees, in index order.
        m_try: Features drawn per split.
        seed: Master seed; tree i uses the stream (seed, i).
        n_features: Feature count M.
        n_train: Training sample count the bootstraps were drawn from.
        min_node_size: Nodes smaller than this were not split.
        sensors: Sensor of each feature column.
    """

    trees: Tuple[RegressionTree, ...]
    m_try: int
    seed: int
    n_features: int
    n_train: int
    min_node_size: int
    sensors: Tuple[SensorId, ...]

    @property
    def n_trees(self) -> int:
        """Tree count N."""
        return len(self.trees)


def fit_forest(
    train: SampleSet,
    n_trees: int = DEFAULT_N_TREES,
    m_try: Optional[int] = None,
    seed: int = 0,
    min_node_size: int = DEFAULT_MIN_NODE_SIZE,
    n_jobs: Optional[int] = None,
) -> Forest:
    """Grow ``n_trees`` trees, each on its own bootstrap of ``train``.

    Args:
        train: Training samples.
        n_trees: Tree count N.
        m_try: Features drawn per split; default max(1, round(M/3)).
        seed: Master seed.
        min_node_size: Nodes smaller than this become leaves.
        n_jobs: Worker count override.

    Raises:
        ArgumentError: Empty training set, n_trees < 1, or m_try outside 1..M.
    """
    if train.n == 0:
        raise ArgumentError('Training set is empty')
    if n_trees < 1:
        raise ArgumentError(f'n_trees must be at least 1, got {n_trees}')
    m_try = default_m_try(train.m) if m_try is None else m_try
    if not 1 <= m_try <= train.m:
        raise ArgumentError(f'm_try must be in 1..{train.m}, got {m_try}')

    features, labels = train.features, train.labels
    trees = parallel_map(
        lambda i: grow_tree(features, labels, seed, i, m_try, min_node_size),
        range(n_trees),
        n_jobs,
    )
    logger.info(
        f'Fitted forest: {n_trees} trees, m_try={m_try}, n={train.n}, '
        f'{sum(t.n_leaves for t in trees)} leaves'
    )
    return Forest(
        trees=tuple(trees),
        m_try=m_try,
        seed=seed,
        n_features=train.m,
        n_train=train.n,
        min_node_size=min_node_size,
        sensors=train.sensors,
    )


def _check_features(forest: Forest, x) -> np.ndarray:
    features = np.asarray(x, dtype=np.float64)
    if features.ndim == 1:
        features = features[None, :]
    if features.ndim != 2 or features.shape[1] != forest.n_features:
        raise ArgumentError(
            f'Forest expects {forest.n_features} features, got shape {np.shape(x)}'
        )
    if not np.all(np.isfinite(features)):
        raise ArgumentError('Features must be finite')
    return features


def predict(forest: Forest, x) -> Any:
    """Mean of the tree predictions; a float for one vector, an array for a matrix."""
    features = _check_features(forest, x)
    total = np.zeros(features.shape[0])
    for tree in forest.trees:
        total += tree.predict(features)
    result = total / forest.n_trees
    return float(result[0]) if np.ndim(x) == 1 else result


def _check_train(forest: Forest, train: SampleSet) -> None:
    if train.n != forest.n_train or train.m != forest.n_features:
        raise ArgumentError(
            f'Forest was fitted on {forest.n_train} x {forest.n_features} samples, '
            f'got {train.n} x {train.m}'
        )


def oob_predictions(forest: Forest, train: SampleSet) -> np.ndarray:
    """Per-sample mean over the trees it is out-of-bag for; NaN if never out-of-bag."""
    _check_train(forest, train)
    sums = np.zeros(train.n)
    counts = np.zeros(train.n, dtype=np.int64)
    for tree in forest.trees:
        if tree.oob.size:
            sums[tree.oob] += tree.predict(train.features[tree.oob])
            counts[tree.oob] += 1
    with np.errstate(invalid='ignore', divide='ignore'):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def oob_mse_curve(forest: Forest, train: SampleSet) -> np.ndarray:
    """OOB mean squared residual of every forest prefix of 1..N trees.

    A sample counts towards prefix N once some tree among the first N has it
    out-of-bag; prefixes covering no sample are NaN.
    """
    _check_train(forest, train)
    sums = np.zeros(train.n)
    counts = np.zeros(train.n, dtype=np.int64)
    curve = np.full(forest.n_trees, np.nan)
    for i, tree in enumerate(forest.trees):
        if tree.oob.size:
            sums[tree.oob] += tree.predict(train.features[tree.oob])
            counts[tree.oob] += 1
        covered = counts > 0
        if covered.any():
            residual = sums[covered] / counts[covered] - train.labels[covered]
            curve[i] = float(np.mean(residual**2))
    return curve


def _importance_deltas(
    tree: RegressionTree, features: np.ndarray, labels: np.ndarray, seed: int
) -> np.ndarray:
    if tree.oob.size == 0:
        raise DegenerateBootstrapError(
            f'Tree {tree.index} has no out-of-bag samples; refit with another seed',
            tree_index=tree.index,
        )
    rng = np.random.default_rng([seed, tree.index])
    x = features[tree.oob]
    y = labels[tree.oob]
    base = np.mean((tree.predict(x) - y) ** 2)
    deltas = np.empty(x.shape[1])
    for k in range(x.shape[1]):
        permuted = x.copy()
        permuted[:, k] = rng.permutation(x[:, k])
        deltas[k] = base - np.mean((tree.predict(permuted) - y) ** 2)
    return deltas


def permutation_importance(
    forest: Forest, train: SampleSet, seed: int, n_jobs: Optional[int] = None
) -> ImportanceReport:
    """Permutation importance of every feature on the trees' OOB sets.

    Per tree i and feature k, ``delta = MSE_i - MSE_i(k)`` where MSE_i(k) is
    the OOB error after permuting feature k. ``I_k = sum_i delta / (N * SE_k)``
    with SE_k the population standard deviation of delta over trees, and
    ``I_k = 0`` when SE_k is 0. Informative features get negative deltas, so
    the ranking uses ``|I_k|``.

    Raises:
        DegenerateBootstrapError: A tree has an empty OOB set.
    """
    _check_train(forest, train)
    deltas = np.vstack(
        parallel_map(
            lambda tree: _importance_deltas(tree, train.features, train.labels, seed),
            forest.trees,
            n_jobs,
        )
    )
    n = forest.n_trees
    mean = deltas.mean(axis=0)
    se = np.sqrt(np.sum((deltas - mean) ** 2, axis=0) / n)
    safe = np.where(se > 0, se, 1.0)
    importance = np.where(se > 0, deltas.sum(axis=0) / (n * safe), 0.0)
    ranking = np.lexsort((np.arange(importance.size), -np.abs(importance)))
    return ImportanceReport(
        sensors=list(forest.sensors),
        importance=importance.tolist(),
        mean_delta_mse=mean.tolist(),
        se=se.tolist(),
        n_trees=n,
        ranking=[forest.sensors[i] for i in ranking],
    )


def to_dict(forest: Forest) -> Dict[str, Any]:
    """JSON-ready dump; bootstraps are regenerated from the seed on reload."""
    return {
        'format_version': MODEL_FORMAT_VERSION,
        'family': 'rf',
        'seed': forest.seed,
        'm_try': forest.m_try,
        'n_features': forest.n_features,
        'n_train': forest.n_train,
        'min_node_size': forest.min_node_size,
        'sensors': [s.value for s in forest.sensors],
        'trees': [
            {
                'index': t.index,
                'feature': t.feature.tolist(),
                'threshold': t.threshold.tolist(),
                'left': t.left.tolist(),
                'right': t.right.tolist(),
                'value': t.value.tolist(),
            }
            for t in forest.trees
        ],
    }


def from_dict(data: Dict[str, Any]) -> Forest:
    """Rebuild a forest written by :func:`to_dict`."""
    try:
        if data['format_version'] != MODEL_FORMAT_VERSION:
            raise SchemaError(f'Unsupported forest format {data["format_version"]}')
        trees = []
        for t in data['trees']:
            rows, oob, _ = bootstrap_rows(data['seed'], t['index'], data['n_train'])
            trees.append(
                RegressionTree(
                    index=t['index'],
                    feature=np.array(t['feature'], dtype=np.int64),
                    threshold=np.array(t['threshold'], dtype=np.float64),
                    left=np.array(t['left'], dtype=np.int64),
                    right=np.array(t['right'], dtype=np.int64),
                    value=np.array(t['value'], dtype=np.float64),
                    bootstrap=rows,
                    oob=oob,
                )
            )
        return Forest(
            trees=tuple(trees),
            m_try=data['m_try'],
            seed=data['seed'],
            n_features=data['n_features'],
            n_train=data['n_train'],
            min_node_size=data['min_node_size'],
            sensors=tuple(SensorId(s) for s in data['sensors']),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f'Malformed forest dump: {str(e)}')


def leaf_labels(forest: Forest, train: SampleSet, tree_index: int) -> Dict[int, np.ndarray]:
    """Bootstrap labels that reached each leaf of one tree."""
    _check_train(forest, train)
    tree = forest.trees[tree_index]
    leaves = tree.apply(train.features[tree.bootstrap])
    labels = train.labels[tree.bootstrap]
    return {int(leaf): labels[leaves == leaf] for leaf in np.unique(leaves)}
