//! Bounded worker pool with results in job order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

pub fn run_ordered<J, R, F>(jobs: &[J], workers: usize, work: F) -> Vec<R>
where
    J: Sync,
    R: Send,
    F: Fn(&J) -> R + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let width = workers.clamp(1, jobs.len().max(1));
    thread::scope(|s| {
        for _ in 0..width {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let result = work(job);
                slots.lock().expect("pool slots")[i] = Some(result);
            });
        }
    });
    slots.into_inner().expect("pool slots").into_iter().map(|r| r.expect("every job ran")).collect()
}
