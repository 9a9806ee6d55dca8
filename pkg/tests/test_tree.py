import numpy as np
import pytest

from twinae.tree import TreeNode, fit_tree, tree_predict


def oracle_predict(node, x):
    """Independent recursive evaluator used to cross-check traversal."""
    if node.distribution is not None:
        best, best_p = 0, -1.0
        for c, p in enumerate(node.distribution):
            if p > best_p:
                best, best_p = c, p
        return best
    if x[node.feature] <= node.threshold:
        return oracle_predict(node.left, x)
    return oracle_predict(node.right, x)


def train_accuracy(tree, X, y):
    return float(np.mean(tree_predict(tree, X) == y))


class TestFit:
    def test_linearly_separable_depth_one(self):
        X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0], [12.0]])
        y = np.array([0, 0, 0, 1, 1, 1])
        tree = fit_tree(X, y, max_depth=5)
        assert not tree.is_leaf
        assert tree.left.is_leaf and tree.right.is_leaf
        assert tree.feature == 0 and 2.0 < tree.threshold < 10.0
        assert train_accuracy(tree, X, y) == 1.0

    def test_xor_needs_depth_two(self):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0])
        tree = fit_tree(X, y, max_depth=2)
        assert train_accuracy(tree, X, y) == 1.0

    def test_depth_zero_is_majority_leaf(self):
        X = np.arange(5.0)[:, None]
        y = np.array([0, 1, 1, 1, 0])
        tree = fit_tree(X, y, max_depth=0)
        assert tree.is_leaf
        assert tree_predict(tree, X[0]) == 1

    def test_majority_tie_prefers_smaller_class(self):
        X = np.arange(4.0)[:, None]
        y = np.array([0, 0, 1, 1])
        tree = fit_tree(X, y, max_depth=0)
        assert tree_predict(tree, np.array([9.0])) == 0

    def test_leaf_distributions_sum_to_one(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(40, 3))
        y = rng.integers(0, 3, size=40)
        tree = fit_tree(X, y, max_depth=4)

        def walk(node):
            if node.is_leaf:
                assert node.distribution.sum() == pytest.approx(1.0, abs=1e-12)
            else:
                assert np.isfinite(node.threshold)
                walk(node.left)
                walk(node.right)

        walk(tree)

    def test_min_leaf_respected(self):
        X = np.arange(10.0)[:, None]
        y = np.array([0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
        tree = fit_tree(X, y, max_depth=10, min_leaf=3)
        # count training samples landing in each leaf
        leaves = {}
        for x in X:
            node = tree
            while not node.is_leaf:
                node = node.left if x[node.feature] <= node.threshold else node.right
            leaves[id(node)] = leaves.get(id(node), 0) + 1
        assert min(leaves.values()) >= 3

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fit_tree(np.zeros((0, 2)), np.array([], dtype=int), max_depth=3)

    def test_duplicate_points_make_leaf(self):
        X = np.ones((6, 2))
        y = np.array([0, 0, 0, 1, 1, 1])
        tree = fit_tree(X, y, max_depth=5)
        assert tree.is_leaf

    def test_accuracy_non_decreasing_in_depth(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(120, 4))
        y = rng.integers(0, 3, size=120)
        prev = 0.0
        for depth in (0, 1, 2, 4, 8, 16):
            acc = train_accuracy(fit_tree(X, y, max_depth=depth), X, y)
            assert acc >= prev - 1e-12
            prev = acc

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(50, 3))
        y = rng.integers(0, 2, size=50)
        t1 = fit_tree(X, y, max_depth=6)
        t2 = fit_tree(X, y, max_depth=6)
        probe = rng.normal(size=(200, 3))
        np.testing.assert_array_equal(tree_predict(t1, probe), tree_predict(t2, probe))


class TestPredict:
    def test_single_leaf(self):
        leaf = TreeNode(distribution=np.array([0.2, 0.5, 0.3]))
        assert tree_predict(leaf, np.zeros(4)) == 1

    def test_hand_built_split(self):
        tree = TreeNode(feature=0, threshold=0.5,
                        left=TreeNode(distribution=np.array([1.0, 0.0])),
                        right=TreeNode(distribution=np.array([0.0, 1.0])))
        assert tree_predict(tree, np.array([0.2])) == 0
        assert tree_predict(tree, np.array([0.9])) == 1
        assert tree_predict(tree, np.array([0.5])) == 0  # boundary goes left

    def test_agreement_with_recursive_oracle(self):
        rng = np.random.default_rng(21)

        def random_tree(depth):
            if depth == 0 or rng.random() < 0.3:
                dist = rng.random(3)
                return TreeNode(distribution=dist / dist.sum())
            return TreeNode(feature=int(rng.integers(0, 4)),
                            threshold=float(rng.normal()),
                            left=random_tree(depth - 1),
                            right=random_tree(depth - 1))

        for _ in range(10):
            tree = random_tree(4)
            for x in rng.normal(size=(30, 4)):
                assert tree_predict(tree, x) == oracle_predict(tree, x)

    def test_batch_invariant_to_order(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(30, 2))
        y = rng.integers(0, 2, size=30)
        tree = fit_tree(X, y, max_depth=4)
        probe = rng.normal(size=(20, 2))
        perm = rng.permutation(20)
        direct = tree_predict(tree, probe)[perm]
        shuffled = tree_predict(tree, probe[perm])
        np.testing.assert_array_equal(direct, shuffled)
