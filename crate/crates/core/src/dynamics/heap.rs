/// Binary min-heap of `(time, key)` alarms with a position index, so an alarm
/// can be rescheduled or cancelled by key in `O(log n)`.
#[derive(Debug, Clone, Default)]
pub struct AlarmHeap {
    entries: Vec<(f64, u32)>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl AlarmHeap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Makes room for keys `< keys`.
    pub fn reserve_keys(&mut self, keys: usize) {
        if self.pos.len() < keys {
            self.pos.resize(keys, ABSENT);
        }
    }

    pub fn clear(&mut self) {
        for &(_, k) in &self.entries {
            self.pos[k as usize] = ABSENT;
        }
        self.entries.clear();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, key: u32) -> bool {
        self.pos.get(key as usize).is_some_and(|&p| p != ABSENT)
    }

    pub fn peek(&self) -> Option<(f64, u32)> {
        self.entries.first().copied()
    }

    /// Inserts `key` at `time`, replacing any pending alarm with that key.
    pub fn schedule(&mut self, key: u32, time: f64) {
        let p = self.pos[key as usize];
        if p == ABSENT {
            let i = self.entries.len();
            self.entries.push((time, key));
            self.pos[key as usize] = i as u32;
            self.sift_up(i);
        } else {
            let i = p as usize;
            let old = self.entries[i].0;
            self.entries[i].0 = time;
            if time < old {
                self.sift_up(i);
            } else {
                self.sift_down(i);
            }
        }
    }

    /// Removes `key` if pending.
    pub fn cancel(&mut self, key: u32) {
        let p = self.pos[key as usize];
        if p != ABSENT {
            self.remove_at(p as usize);
        }
    }

    pub fn pop(&mut self) -> Option<(f64, u32)> {
        if self.entries.is_empty() {
            return None;
        }
        let top = self.entries[0];
        self.remove_at(0);
        Some(top)
    }

    fn remove_at(&mut self, i: usize) {
        let last = self.entries.len() - 1;
        let key = self.entries[i].1;
        self.pos[key as usize] = ABSENT;
        if i == last {
            self.entries.pop();
            return;
        }
        let moved = self.entries[last];
        self.entries[i] = moved;
        self.entries.pop();
        self.pos[moved.1 as usize] = i as u32;
        if i > 0 && moved.0 < self.entries[(i - 1) / 2].0 {
            self.sift_up(i);
        } else {
            self.sift_down(i);
        }
    }

    fn sift_up(&mut self, mut i: usize) {
        let item = self.entries[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.entries[parent];
            if p.0 <= item.0 {
                break;
            }
            self.entries[i] = p;
            self.pos[p.1 as usize] = i as u32;
            i = parent;
        }
        self.entries[i] = item;
        self.pos[item.1 as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.entries.len();
        let item = self.entries[i];
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && self.entries[r].0 < self.entries[l].0 { r } else { l };
            let child = self.entries[c];
            if child.0 >= item.0 {
                break;
            }
            self.entries[i] = child;
            self.pos[child.1 as usize] = i as u32;
            i = c;
        }
        self.entries[i] = item;
        self.pos[item.1 as usize] = i as u32;
    }
}
