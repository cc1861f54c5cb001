use std::path::PathBuf;
use std::time::Duration;

use pronscore::ctcl::CtclContainer;
use pronscore::{LogitMatrix, Vocabulary};

use crate::ServiceError;

/// Where logits come from.
#[derive(Debug, Clone)]
pub enum Backend {
    /// Pre-computed CTCL files, addressed by id as `<dir>/<id>.ctcl`.
    File { dir: PathBuf },
    /// An inference endpoint that takes raw audio bytes and answers with a
    /// CTCL container.
    Remote { url: String, timeout: Duration },
}

impl Backend {
    pub fn kind(&self) -> &'static str {
        match self {
            Backend::File { .. } => "file",
            Backend::Remote { .. } => "remote",
        }
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        match self {
            Backend::File { dir } if !dir.is_dir() => Err(ServiceError::Config(format!(
                "logits directory {} does not exist",
                dir.display()
            ))),
            Backend::Remote { timeout, .. } if timeout.is_zero() => Err(ServiceError::Config(
                "remote timeout must be positive".into(),
            )),
            _ => Ok(()),
        }
    }

    pub(crate) fn load_file(&self, id: &str) -> Result<CtclContainer, ServiceError> {
        let Backend::File { dir } = self else {
            return Err(ServiceError::BadRequest(
                "logits_id requires the file backend".into(),
            ));
        };
        let valid = !id.is_empty()
            && !id.starts_with('.')
            && id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
        if !valid {
            return Err(ServiceError::BadRequest(format!(
                "invalid logits id {id:?}"
            )));
        }
        let path = dir.join(format!("{id}.ctcl"));
        if !path.is_file() {
            return Err(ServiceError::NotFound(format!("logits id {id:?}")));
        }
        CtclContainer::read_file(&path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))
    }
}

/// Sends `audio` to the remote backend and checks the returned container
/// against the service vocabulary.
pub async fn fetch_remote_logits(
    audio: Vec<u8>,
    url: &str,
    timeout: Duration,
    vocab: &Vocabulary,
) -> Result<LogitMatrix, ServiceError> {
    let client = reqwest::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| ServiceError::BackendUnavailable(e.to_string()))?;
    let response = client
        .post(url)
        .header("content-type", "application/octet-stream")
        .body(audio)
        .send()
        .await
        .map_err(|e| ServiceError::BackendUnavailable(describe(&e)))?;
    if !response.status().is_success() {
        return Err(ServiceError::BackendUnavailable(format!(
            "backend answered {}",
            response.status()
        )));
    }
    let bytes = response
        .bytes()
        .await
        .map_err(|e| ServiceError::BackendUnavailable(describe(&e)))?;
    let container = CtclContainer::from_bytes(&bytes).map_err(|e| {
        ServiceError::BackendUnavailable(format!("unreadable backend response: {e}"))
    })?;
    if container.vocab.labels() != vocab.labels()
        || container.vocab.blank_index() != vocab.blank_index()
    {
        return Err(ServiceError::VocabMismatch(format!(
            "backend labels {:?} differ from service labels",
            container.vocab.labels()
        )));
    }
    Ok(container.logits)
}

fn describe(e: &reqwest::Error) -> String {
    if e.is_timeout() {
        format!("timed out: {e}")
    } else {
        e.to_string()
    }
}
