//! Factual-inconsistency error typology: eleven error types grouped into
//! four categories. Every other module uses these codes as its vocabulary
//! for labels, report columns, and generation targets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the eleven error type codes.
///
/// Declaration order is the canonical column order used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorType {
    /// Answer content unfaithful or unverifiable against the reference.
    Hallu,
    /// Statement conflicts with the reference.
    KCont,
    /// Entities swapped relative to the reference.
    KInve,
    /// Reference entities inaccurately combined, altering meaning.
    KConf,
    /// A term or concept replaced by a different one.
    KConc,
    /// Specific detail applied to a broader category.
    LOver,
    /// Cause and effect reversed, or a causal link added where none exists.
    LCaus,
    /// Necessary conditions misread as sufficient and necessary.
    LConf,
    /// Non-inclusion relationship misrepresented as inclusion.
    LIncl,
    /// Any other logical connection error.
    LOthe,
    /// Annotator bucket for errors outside the typology.
    Other,
}

/// Owning category of an error type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Hallucination,
    Knowledge,
    Logical,
    Other,
}

/// Raised when a code string does not name any [`ErrorType`].
#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown error-type code: {0:?}")]
pub struct UnknownCode(pub String);

impl ErrorType {
    /// All members in canonical (report column) order.
    pub const ALL: [ErrorType; 11] = [
        ErrorType::Hallu,
        ErrorType::KCont,
        ErrorType::KInve,
        ErrorType::KConf,
        ErrorType::KConc,
        ErrorType::LOver,
        ErrorType::LCaus,
        ErrorType::LConf,
        ErrorType::LIncl,
        ErrorType::LOthe,
        ErrorType::Other,
    ];

    /// Canonical short code, without trailing period.
    pub fn code(self) -> &'static str {
        match self {
            ErrorType::Hallu => "Hallu",
            ErrorType::KCont => "KCont",
            ErrorType::KInve => "KInve",
            ErrorType::KConf => "KConf",
            ErrorType::KConc => "KConc",
            ErrorType::LOver => "LOver",
            ErrorType::LCaus => "LCaus",
            ErrorType::LConf => "LConf",
            ErrorType::LIncl => "LIncl",
            ErrorType::LOthe => "LOthe",
            ErrorType::Other => "Other",
        }
    }

    /// The unique owning category.
    pub fn category(self) -> Category {
        match self {
            ErrorType::Hallu => Category::Hallucination,
            ErrorType::KCont | ErrorType::KInve | ErrorType::KConf | ErrorType::KConc => {
                Category::Knowledge
            }
            ErrorType::LOver
            | ErrorType::LCaus
            | ErrorType::LConf
            | ErrorType::LIncl
            | ErrorType::LOthe => Category::Logical,
            ErrorType::Other => Category::Other,
        }
    }
}

/// The owning category of `t`. Total over all eleven members.
pub fn category_of(t: ErrorType) -> Category {
    t.category()
}

/// Parse a short code as it appears in report column headers.
///
/// Case-insensitive; a trailing period is ignored. A few aliases seen in
/// annotated data are accepted: `LOth` for `LOthe`, and `Other Errors` /
/// `OtherError` for `Other`.
pub fn parse_error_type(code: &str) -> Result<ErrorType, UnknownCode> {
    let trimmed = code.trim().trim_end_matches('.');
    let lower = trimmed.to_lowercase();
    let parsed = match lower.as_str() {
        "hallu" => ErrorType::Hallu,
        "kcont" => ErrorType::KCont,
        "kinve" => ErrorType::KInve,
        "kconf" => ErrorType::KConf,
        "kconc" => ErrorType::KConc,
        "lover" => ErrorType::LOver,
        "lcaus" => ErrorType::LCaus,
        "lconf" => ErrorType::LConf,
        "lincl" => ErrorType::LIncl,
        "lothe" | "loth" => ErrorType::LOthe,
        "other" | "other errors" | "othererror" | "other error" => ErrorType::Other,
        _ => return Err(UnknownCode(code.to_string())),
    };
    Ok(parsed)
}

impl Category {
    /// All categories in canonical order.
    pub const ALL: [Category; 4] = [
        Category::Hallucination,
        Category::Knowledge,
        Category::Logical,
        Category::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Hallucination => "Hallucination",
            Category::Knowledge => "Knowledge",
            Category::Logical => "Logical",
            Category::Other => "Other",
        }
    }

    /// Member error types of this category, in canonical order.
    pub fn members(self) -> Vec<ErrorType> {
        ErrorType::ALL
            .iter()
            .copied()
            .filter(|t| t.category() == self)
            .collect()
    }
}

impl std::fmt::Display for ErrorType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ErrorType {
    type Err = UnknownCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_error_type(s)
    }
}

impl Serialize for ErrorType {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for ErrorType {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_error_type(&s).map_err(serde::de::Error::custom)
    }
}
