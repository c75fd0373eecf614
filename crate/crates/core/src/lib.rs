//! Game description language, catalog, rule mining and the recommendation
//! protocols of the design assistant.
//!
//! Mining and recommendation are generic over the frequency scalar
//! ([`scalar::Frequency`]); the aliases below fix it to `f64` for everyday use
//! and to exact rationals for checking.

pub mod scalar;
pub mod vgdl;
pub mod catalog;
pub mod mining;
pub mod recommender;
pub mod session;

pub use scalar::{Exact, Frequency};

pub type Itemset = mining::FrequentItemset<f64>;
pub type Rule = mining::AssociationRule<f64>;
pub type SpriteRec = recommender::SpriteRecommendation<f64>;
pub type InteractionRec = recommender::InteractionRecommendation<f64>;
pub type Placement = recommender::PlacementSuggestion<f64>;

pub type ExactItemset = mining::FrequentItemset<Exact>;
pub type ExactRule = mining::AssociationRule<Exact>;
