use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// `items.map(f)` on up to `jobs` threads; output order matches input.
pub fn par_map<T: Sync, U: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<U>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let v = f(&items[i]);
                slots.lock().expect("worker panicked")[i] = Some(v);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|v| v.expect("every slot filled")).collect()
}
