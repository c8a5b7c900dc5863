//! Prompt-asset management: versioned template files with named
//! placeholders, embedded defaults for both locales, and an override
//! directory for user-supplied variants.
//!
//! Assets are plain UTF-8 files keyed by file name under a locale
//! directory (`zh/decompose.txt`, `en/fact_cot.txt`, ...). The embedded
//! defaults ship with the crate; a configured prompt directory takes
//! precedence file by file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::text_digest;

/// Prompt language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locale {
    Zh,
    En,
}

impl Locale {
    pub fn code(self) -> &'static str {
        match self {
            Locale::Zh => "zh",
            Locale::En => "en",
        }
    }
}

impl std::str::FromStr for Locale {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "zh" => Ok(Locale::Zh),
            "en" => Ok(Locale::En),
            other => Err(PromptError::UnknownLocale(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("unknown locale {0:?}, expected zh or en")]
    UnknownLocale(String),
    #[error("no prompt asset named {name:?} for locale {locale}")]
    MissingAsset { name: String, locale: &'static str },
    #[error("cannot read prompt asset {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad few-shot asset {name:?}: {message}")]
    BadFewShot { name: String, message: String },
}

macro_rules! embedded {
    ($($name:literal),* $(,)?) => {
        &[
            $(
                ("zh", $name, include_str!(concat!("../assets/zh/", $name))),
                ("en", $name, include_str!(concat!("../assets/en/", $name))),
            )*
        ]
    };
}

/// Embedded default assets, one entry per (locale, file name).
const EMBEDDED: &[(&str, &str, &str)] = embedded![
    "decompose.txt",
    "decompose_retry.txt",
    "fact_cot.txt",
    "fact_direct.txt",
    "logic_cot.txt",
    "logic_direct.txt",
    "verdict_retry.txt",
    "gen_hallu_1.txt",
    "gen_hallu_2.txt",
    "gen_hallu_3.txt",
    "gen_kcont_word.txt",
    "gen_kcont_sentence.txt",
    "gen_kinve.txt",
    "gen_kconf.txt",
    "gen_kconc.txt",
    "gen_lover.txt",
    "gen_lcaus.txt",
    "gen_lconf.txt",
    "gen_lincl.txt",
    "gen_lothe.txt",
    "gen_pos_synonym.txt",
    "gen_pos_paraphrase.txt",
    "gen_pos_summarize.txt",
    "fewshot_logical_connection.json",
    "fewshot_pronoun_substitution.json",
    "fewshot_unique_format.json",
];

/// Access to prompt assets for one locale.
#[derive(Debug, Clone)]
pub struct PromptLibrary {
    locale: Locale,
    override_dir: Option<PathBuf>,
}

impl PromptLibrary {
    pub fn new(locale: Locale) -> Self {
        PromptLibrary {
            locale,
            override_dir: None,
        }
    }

    pub fn with_override_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.override_dir = Some(dir.into());
        self
    }

    pub fn locale(&self) -> Locale {
        self.locale
    }

    /// Raw asset content by file name; override directory wins.
    pub fn asset(&self, name: &str) -> Result<String, PromptError> {
        if let Some(dir) = &self.override_dir {
            let path = dir.join(self.locale.code()).join(name);
            match std::fs::read_to_string(&path) {
                Ok(text) => return Ok(text),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(source) => {
                    return Err(PromptError::Io {
                        path: path.display().to_string(),
                        source,
                    })
                }
            }
        }
        EMBEDDED
            .iter()
            .find(|(loc, n, _)| *loc == self.locale.code() && *n == name)
            .map(|(_, _, text)| text.to_string())
            .ok_or_else(|| PromptError::MissingAsset {
                name: name.to_string(),
                locale: self.locale.code(),
            })
    }

    /// Template content: `asset("<name>.txt")`.
    pub fn template(&self, name: &str) -> Result<String, PromptError> {
        self.asset(&format!("{name}.txt"))
    }

    /// SHA-256 digests of the named templates, for run provenance.
    pub fn digests(&self, names: &[&str]) -> Result<BTreeMap<String, String>, PromptError> {
        let mut out = BTreeMap::new();
        for name in names {
            out.insert(name.to_string(), text_digest(&self.template(name)?));
        }
        Ok(out)
    }
}

/// Substitute `{{key}}` placeholders. Unknown placeholders are left
/// untouched so missing substitutions stay visible.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (key, value) in vars {
        out = out.replace(&format!("{{{{{key}}}}}"), value);
    }
    out
}
