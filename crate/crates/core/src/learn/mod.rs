//! Classifiers, evaluation metrics, leave-one-subject-out cross-validation,
//! and random hyperparameter search.

mod baseline;
pub mod cv;
mod forest;
pub mod metrics;

pub use baseline::{fit_classifier, ClassifierSpec, FittedClassifier, GaussianNb, Knn};
pub use cv::{loso_cv, random_search, CandidateResult, EvalResult, FoldResult, SearchOutcome, SearchSpace};
pub use forest::{train_random_forest, ForestParams, MaxFeatures, TrainedForest};
pub use metrics::{cohens_kappa, roc_auc, weighted_f1};
