//! Global configuration: flags override environment variables, which
//! override the config file, which overrides built-in defaults. The fully
//! resolved config is printable and digested for run provenance.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use facteval::llm::{
    text_digest, Backend, Client, ClientOptions, RemoteChatApi, RetryPolicy, ScriptedMock,
};
use facteval::prompts::{Locale, PromptLibrary};

use crate::CliError;

const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
const DEFAULT_KEY_ENV: &str = "FACTEVAL_API_KEY";
const DEFAULT_CACHE_DIR: &str = ".facteval-cache";

/// Keys accepted in the TOML config file; all optional.
#[derive(Debug, Default, Deserialize)]
pub struct ConfigFile {
    pub backend: Option<String>,
    pub endpoint: Option<String>,
    pub api_key_env: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub concurrency: Option<usize>,
    pub prompt_dir: Option<PathBuf>,
    pub locale: Option<String>,
    pub judge_model: Option<String>,
    pub retry_attempts: Option<u32>,
}

/// Command-line overrides; every field mirrors a config key.
#[derive(Debug, Default, clap::Args)]
pub struct GlobalArgs {
    /// Backend: remote, mock:<script.json>, or replay
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Chat-completions endpoint URL (remote backend)
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    /// Name of the environment variable holding API credentials
    #[arg(long, global = true)]
    pub api_key_env: Option<String>,
    /// Response cache directory
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Maximum concurrent in-flight requests and worker threads
    #[arg(long, global = true)]
    pub concurrency: Option<usize>,
    /// Directory of prompt-asset overrides
    #[arg(long, global = true)]
    pub prompt_dir: Option<PathBuf>,
    /// Prompt language: zh or en
    #[arg(long, global = true)]
    pub locale: Option<String>,
    /// Judge model identifier
    #[arg(long, global = true)]
    pub judge_model: Option<String>,
    /// Config file path (default: ./facteval.toml when present)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Backend selection after resolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendChoice {
    Remote,
    Mock { script: PathBuf },
    Replay,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct GlobalConfig {
    pub backend: BackendChoice,
    pub endpoint: String,
    pub api_key_env: String,
    pub cache_dir: PathBuf,
    pub concurrency: usize,
    pub prompt_dir: Option<PathBuf>,
    pub locale: Locale,
    pub judge_model: String,
    pub retry_attempts: u32,
}

impl GlobalConfig {
    /// Resolve from flags, environment, config file, and defaults.
    pub fn resolve(args: &GlobalArgs) -> Result<Self, CliError> {
        let file = load_config_file(args.config.as_deref())?;
        let env = |name: &str| std::env::var(name).ok().filter(|v| !v.is_empty());

        let backend_raw = args
            .backend
            .clone()
            .or_else(|| env("FACTEVAL_BACKEND"))
            .or(file.backend)
            .unwrap_or_else(|| "remote".to_string());
        let backend = parse_backend(&backend_raw)?;

        let locale_raw = args
            .locale
            .clone()
            .or_else(|| env("FACTEVAL_LOCALE"))
            .or(file.locale)
            .unwrap_or_else(|| "zh".to_string());
        let locale: Locale = locale_raw
            .parse()
            .map_err(|e| CliError::usage(format!("{e}")))?;

        let concurrency = match args
            .concurrency
            .or_else(|| env("FACTEVAL_CONCURRENCY").and_then(|v| v.parse().ok()))
            .or(file.concurrency)
        {
            Some(0) => return Err(CliError::usage("concurrency must be at least 1")),
            Some(n) => n,
            None => 4,
        };

        Ok(GlobalConfig {
            backend,
            endpoint: args
                .endpoint
                .clone()
                .or_else(|| env("FACTEVAL_ENDPOINT"))
                .or(file.endpoint)
                .unwrap_or_else(|| DEFAULT_ENDPOINT.to_string()),
            api_key_env: args
                .api_key_env
                .clone()
                .or_else(|| env("FACTEVAL_API_KEY_ENV"))
                .or(file.api_key_env)
                .unwrap_or_else(|| DEFAULT_KEY_ENV.to_string()),
            cache_dir: args
                .cache_dir
                .clone()
                .or_else(|| env("FACTEVAL_CACHE_DIR").map(PathBuf::from))
                .or(file.cache_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR)),
            concurrency,
            prompt_dir: args
                .prompt_dir
                .clone()
                .or_else(|| env("FACTEVAL_PROMPT_DIR").map(PathBuf::from))
                .or(file.prompt_dir),
            locale,
            judge_model: args
                .judge_model
                .clone()
                .or_else(|| env("FACTEVAL_JUDGE_MODEL"))
                .or(file.judge_model)
                .unwrap_or_else(|| "gpt-4".to_string()),
            retry_attempts: file.retry_attempts.unwrap_or(5),
        })
    }

    /// Digest over the resolved config (credentials excluded by
    /// construction: only the variable name is part of the config).
    pub fn digest(&self) -> String {
        text_digest(&serde_json::to_string(self).expect("config serializes"))
    }

    /// One-line printable form for provenance.
    pub fn describe(&self) -> String {
        let backend = match &self.backend {
            BackendChoice::Remote => "remote".to_string(),
            BackendChoice::Mock { script } => format!("mock:{}", script.display()),
            BackendChoice::Replay => "replay".to_string(),
        };
        format!(
            "config {} backend={backend} locale={} judge={} concurrency={} cache={}",
            &self.digest()[..12],
            self.locale.code(),
            self.judge_model,
            self.concurrency,
            self.cache_dir.display(),
        )
    }

    pub fn prompt_library(&self) -> PromptLibrary {
        let library = PromptLibrary::new(self.locale);
        match &self.prompt_dir {
            Some(dir) => library.with_override_dir(dir),
            None => library,
        }
    }

    /// Build the chat client. The mock backend runs uncached so scripted
    /// runs never depend on cache state.
    pub fn client(&self) -> Result<Client, CliError> {
        let retry = RetryPolicy {
            max_attempts: self.retry_attempts.max(1),
            ..RetryPolicy::default()
        };
        let (backend, cache_dir) = match &self.backend {
            BackendChoice::Remote => {
                let remote = RemoteChatApi::from_env(self.endpoint.clone(), &self.api_key_env)?;
                (Backend::Remote(remote), Some(self.cache_dir.clone()))
            }
            BackendChoice::Mock { script } => {
                let text = std::fs::read_to_string(script).map_err(|e| {
                    CliError::data(format!("cannot read mock script {}: {e}", script.display()))
                })?;
                (Backend::Mock(ScriptedMock::from_script(&text)?), None)
            }
            BackendChoice::Replay => (Backend::ReplayCacheOnly, Some(self.cache_dir.clone())),
        };
        let options = ClientOptions {
            retry,
            concurrency: self.concurrency,
            cache_dir,
        };
        Ok(Client::new(backend, options)?)
    }
}

fn parse_backend(raw: &str) -> Result<BackendChoice, CliError> {
    match raw {
        "remote" => Ok(BackendChoice::Remote),
        "replay" => Ok(BackendChoice::Replay),
        other => match other.strip_prefix("mock:") {
            Some(script) if !script.is_empty() => Ok(BackendChoice::Mock {
                script: PathBuf::from(script),
            }),
            _ => Err(CliError::usage(format!(
                "unknown backend {raw:?}, expected remote, mock:<script.json>, or replay"
            ))),
        },
    }
}

fn load_config_file(explicit: Option<&Path>) -> Result<ConfigFile, CliError> {
    let path = match explicit {
        Some(path) => path.to_path_buf(),
        None => match std::env::var("FACTEVAL_CONFIG") {
            Ok(path) if !path.is_empty() => PathBuf::from(path),
            _ => {
                let default = PathBuf::from("facteval.toml");
                if !default.is_file() {
                    return Ok(ConfigFile::default());
                }
                default
            }
        },
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::data(format!("bad config {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_without_any_input() {
        let config = GlobalConfig::resolve(&GlobalArgs::default()).unwrap();
        assert_eq!(config.backend, BackendChoice::Remote);
        assert_eq!(config.locale, Locale::Zh);
        assert_eq!(config.concurrency, 4);
        assert_eq!(config.judge_model, "gpt-4");
    }

    #[test]
    fn flags_override_defaults() {
        let args = GlobalArgs {
            backend: Some("mock:script.json".into()),
            locale: Some("en".into()),
            concurrency: Some(9),
            ..GlobalArgs::default()
        };
        let config = GlobalConfig::resolve(&args).unwrap();
        assert_eq!(
            config.backend,
            BackendChoice::Mock {
                script: PathBuf::from("script.json")
            }
        );
        assert_eq!(config.locale, Locale::En);
        assert_eq!(config.concurrency, 9);
    }

    #[test]
    fn bad_backend_is_usage_error() {
        let args = GlobalArgs {
            backend: Some("carrier-pigeon".into()),
            ..GlobalArgs::default()
        };
        assert!(GlobalConfig::resolve(&args).is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = GlobalConfig::resolve(&GlobalArgs::default()).unwrap();
        let b = GlobalConfig::resolve(&GlobalArgs {
            locale: Some("en".into()),
            ..GlobalArgs::default()
        })
        .unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), a.digest());
    }
}
