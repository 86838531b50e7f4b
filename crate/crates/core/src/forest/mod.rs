//! Random forests of unpruned CART trees with bagging, out-of-bag error,
//! permutation variable importance and proximity matrices.

mod ensemble;
mod importance;
mod proximity;
mod tree;

pub use ensemble::{fit_forest, oob_error, ForestParams, OobEstimate, RandomForest};
pub use importance::{variable_importance, ImportanceReport};
pub use proximity::{proximity, ProximityMatrix};
pub use tree::{
    grow_tree, DecisionTree, FeatureKind, Leaf, Node, SplitKind, SplitRule, Task, TreeParams,
};
