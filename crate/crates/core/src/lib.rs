//! Arrow-Pratt risk-aversion measures for arbitrary (including non-fair) lotteries, extraction
//! of market-implied ARA and RRA series from index data, and closed-form risky-asset weights in
//! a two-asset market.
//!
//! Start with [`utility::UtilitySpec`] and [`lottery`] for the measures themselves,
//! [`estimation`] for the market pipeline, and [`portfolio`] for allocation rules.

pub mod cli;
pub mod data_io;
pub mod date;
pub mod error;
pub mod estimation;
pub mod lottery;
pub mod portfolio;
mod roots;
pub mod synthetic;
pub mod utility;
pub mod validate;

pub use data_io::{MarketDataset, ResultTable};
pub use date::{MonthRange, YearMonth};
pub use error::{Error, Result};
pub use estimation::{MarketRecord, MomentSeries, RiskAversionPoint, Scheme};
pub use lottery::{DiscreteLottery, Moments};
pub use portfolio::{MarketParams, WeightFamily};
pub use utility::UtilitySpec;
