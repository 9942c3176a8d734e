//! In-memory registries for datasets, jobs and chat sessions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::Serialize;
use tokio::sync::Semaphore;

use gp4nldr_core::explain::{ChatSession, Explainer};
use gp4nldr_core::llm::ChatProvider;
use gp4nldr_core::{examples, Dataset, RunConfig, RunResult};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_concurrent_jobs: usize,
    /// Use the echo provider for every session regardless of the request.
    pub force_mock: bool,
    /// Load the bundled example datasets at startup.
    pub preload_datasets: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_concurrent_jobs: 2,
            force_mock: false,
            preload_datasets: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Job {
    pub id: String,
    pub dataset_id: String,
    pub state: JobState,
    /// Generations completed.
    pub progress: usize,
    pub generations: usize,
    pub fitness_history: Vec<f64>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Arc<RunResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub config: RunConfig,
}

pub struct SessionEntry {
    pub session: ChatSession,
    pub result: Arc<RunResult>,
    pub provider: Arc<dyn ChatProvider>,
}

pub type SharedSession = Arc<tokio::sync::Mutex<SessionEntry>>;

pub struct AppState {
    pub config: ServiceConfig,
    pub datasets: Mutex<HashMap<String, Arc<Dataset>>>,
    pub jobs: Arc<Mutex<HashMap<String, Job>>>,
    pub sessions: Mutex<HashMap<String, SharedSession>>,
    pub workers: Arc<Semaphore>,
    pub explainer: Arc<Explainer>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        let mut datasets = HashMap::new();
        if config.preload_datasets {
            for id in examples::ids() {
                if let Some(d) = examples::dataset(id) {
                    datasets.insert(id.to_string(), Arc::new(d));
                }
            }
        }
        Self {
            workers: Arc::new(Semaphore::new(config.max_concurrent_jobs.max(1))),
            config,
            datasets: Mutex::new(datasets),
            jobs: Arc::default(),
            sessions: Mutex::default(),
            explainer: Arc::new(Explainer::default()),
        }
    }

    pub fn dataset(&self, id: &str) -> Option<Arc<Dataset>> {
        self.datasets.lock().expect("dataset registry").get(id).cloned()
    }

    pub fn job(&self, id: &str) -> Option<Job> {
        self.jobs.lock().expect("job registry").get(id).cloned()
    }

    pub fn session(&self, id: &str) -> Option<SharedSession> {
        self.sessions.lock().expect("session registry").get(id).cloned()
    }
}

pub fn new_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}
