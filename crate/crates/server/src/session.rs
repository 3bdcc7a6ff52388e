//! In-memory demo authentication sessions.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use illusionpad::keypad::{
    hybrid_keypad_with_ordering, shuffle_ordering, DigitOrdering, RenderStyle, ShuffleMode,
};
use illusionpad::{Category, DeviceProfile};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::sync::Mutex;

use crate::api::{b64, DeviceRef, SessionKeypad};
use crate::error::{ApiError, ApiResult};

pub const DEFAULT_TTL: Duration = Duration::from_secs(15 * 60);
pub const MAX_FAILURES: u32 = 5;
/// Demo keypads are rendered at this fraction of the native resolution.
pub const SESSION_SCALE: f64 = 0.25;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionRequest {
    #[serde(default)]
    pub device: DeviceRef,
    #[serde(default = "default_category")]
    pub category: Category,
    pub pin: String,
    #[serde(default)]
    pub shuffle_mode: ShuffleMode,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_category() -> Category {
    Category::C2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressRequest {
    pub button: usize,
}

pub struct Session {
    device: DeviceProfile,
    category: Category,
    mode: ShuffleMode,
    ordering: DigitOrdering,
    rng: ChaCha8Rng,
    salt: [u8; 16],
    digest: [u8; 32],
    entered: Vec<u8>,
    attempts: u32,
    failures: u32,
    created: Instant,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub device: String,
    pub category: Category,
    pub shuffle_mode: ShuffleMode,
    pub attempts: u32,
    pub failures: u32,
    pub attempts_left: u32,
    pub locked: bool,
    pub pressed: usize,
    pub expires_in_s: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keypad: Option<SessionKeypad>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubmitOutcome {
    pub accepted: bool,
    #[serde(flatten)]
    pub session: SessionView,
}

fn digest(salt: &[u8; 16], digits: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(salt);
    h.update(digits);
    h.finalize().into()
}

fn same(a: &[u8; 32], b: &[u8; 32]) -> bool {
    a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

impl Session {
    pub fn new(req: &SessionRequest, device: DeviceProfile) -> ApiResult<Self> {
        let pin = req.pin.trim();
        if !(4..=8).contains(&pin.len()) || !pin.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ApiError::bad_request("pin must be 4 to 8 decimal digits"));
        }
        let digits: Vec<u8> = pin.bytes().map(|b| b - b'0').collect();
        let mut rng = match req.seed {
            Some(s) => ChaCha8Rng::seed_from_u64(s),
            None => ChaCha8Rng::from_entropy(),
        };
        let mut salt = [0u8; 16];
        rand::thread_rng().fill_bytes(&mut salt);
        let ordering = shuffle_ordering(&mut rng);
        Ok(Self {
            device,
            category: req.category,
            mode: req.shuffle_mode,
            ordering,
            rng,
            digest: digest(&salt, &digits),
            salt,
            entered: Vec::new(),
            attempts: 0,
            failures: 0,
            created: Instant::now(),
        })
    }

    pub fn expired(&self, ttl: Duration) -> bool {
        self.created.elapsed() >= ttl
    }

    pub fn locked(&self) -> bool {
        self.failures >= MAX_FAILURES
    }

    fn ensure_unlocked(&self) -> ApiResult<()> {
        if self.locked() {
            return Err(ApiError::new(
                axum::http::StatusCode::LOCKED,
                "session is locked",
            ));
        }
        Ok(())
    }

    fn reshuffle(&mut self) {
        self.ordering = shuffle_ordering(&mut self.rng);
    }

    /// Records a button press; the digit is resolved here and kept private.
    pub fn press(&mut self, button: usize) -> ApiResult<bool> {
        self.ensure_unlocked()?;
        if button > 9 {
            return Err(ApiError::bad_request(format!(
                "button {button} outside 0..=9"
            )));
        }
        if self.entered.len() >= 8 {
            return Err(ApiError::bad_request("too many presses; submit first"));
        }
        self.entered.push(self.ordering.digit_at(button));
        let reshuffled = self.mode == ShuffleMode::PerDigit;
        if reshuffled {
            self.reshuffle();
        }
        Ok(reshuffled)
    }

    pub fn submit(&mut self) -> ApiResult<bool> {
        self.ensure_unlocked()?;
        if self.entered.is_empty() {
            return Err(ApiError::bad_request("nothing entered"));
        }
        let ok = same(&digest(&self.salt, &self.entered), &self.digest);
        self.entered.clear();
        self.attempts += 1;
        if ok {
            self.failures = 0;
        } else {
            self.failures += 1;
        }
        self.reshuffle();
        Ok(ok)
    }

    /// What is needed to draw the current keypad, detached from the session lock.
    pub fn snapshot(&self) -> KeypadSnapshot {
        KeypadSnapshot {
            device: self.device.clone(),
            category: self.category,
            ordering: self.ordering,
        }
    }

    pub fn render(&self) -> ApiResult<SessionKeypad> {
        self.snapshot().render()
    }

    pub fn view(&self, id: &str, ttl: Duration, keypad: Option<SessionKeypad>) -> SessionView {
        SessionView {
            session_id: id.to_string(),
            device: self.device.name.clone(),
            category: self.category,
            shuffle_mode: self.mode,
            attempts: self.attempts,
            failures: self.failures,
            attempts_left: MAX_FAILURES.saturating_sub(self.failures),
            locked: self.locked(),
            pressed: self.entered.len(),
            expires_in_s: ttl.saturating_sub(self.created.elapsed()).as_secs(),
            keypad,
        }
    }

    #[cfg(test)]
    pub(crate) fn ordering(&self) -> DigitOrdering {
        self.ordering
    }
}

pub struct KeypadSnapshot {
    device: DeviceProfile,
    category: Category,
    ordering: DigitOrdering,
}

impl KeypadSnapshot {
    pub fn render(&self) -> ApiResult<SessionKeypad> {
        let (w, h) = illusionpad::bundle::working_resolution(&self.device, SESSION_SCALE)
            .or_else(|_| illusionpad::bundle::working_resolution(&self.device, 0.5))?;
        let device = self.device.at_resolution(w, h);
        let c = self.category;
        let keypad = hybrid_keypad_with_ordering(
            &device,
            c.sigma_lf(),
            c.sigma_hf(),
            self.ordering,
            &RenderStyle::default(),
        )?;
        Ok(SessionKeypad {
            image: b64(&keypad.hybrid.composed.encode_png()?),
            width: w,
            height: h,
            buttons: keypad.layout.button_rects(),
        })
    }
}

/// Sessions by id; each session has its own lock so mutations serialise per id.
#[derive(Default)]
pub struct SessionStore {
    inner: std::sync::Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionStore {
    pub fn insert(&self, session: Session, ttl: Duration) -> String {
        let id = uuid::Uuid::new_v4().to_string();
        let mut map = self.inner.lock().expect("session map poisoned");
        map.retain(|_, s| s.try_lock().map(|s| !s.expired(ttl)).unwrap_or(true));
        map.insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    pub fn get(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        self.inner
            .lock()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("no such session"))
    }

    pub fn remove(&self, id: &str) {
        self.inner.lock().expect("session map poisoned").remove(id);
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session(pin: &str, mode: ShuffleMode) -> Session {
        let req = SessionRequest {
            device: DeviceRef::default(),
            category: Category::C2,
            pin: pin.into(),
            shuffle_mode: mode,
            seed: Some(4),
        };
        Session::new(&req, DeviceProfile::nexus6()).unwrap()
    }

    fn enter(s: &mut Session, pin: &[u8]) {
        for &d in pin {
            let b = s.ordering().button_of(d);
            s.press(b).unwrap();
        }
    }

    #[test]
    fn correct_pin_is_accepted_and_reshuffles() {
        let mut s = session("2580", ShuffleMode::PerAttempt);
        let before = s.ordering();
        enter(&mut s, &[2, 5, 8, 0]);
        assert_eq!(s.ordering(), before);
        assert!(s.submit().unwrap());
        assert_ne!(s.ordering(), before);
        assert_eq!(s.attempts, 1);
    }

    #[test]
    fn per_digit_mode_reshuffles_each_press() {
        let mut s = session("1111", ShuffleMode::PerDigit);
        let mut seen = vec![s.ordering()];
        enter(&mut s, &[1, 1, 1, 1]);
        seen.push(s.ordering());
        assert!(seen[0] != seen[1]);
        assert!(s.submit().unwrap());
    }

    #[test]
    fn lock_after_five_failures() {
        let mut s = session("1234", ShuffleMode::PerAttempt);
        for i in 0..MAX_FAILURES {
            enter(&mut s, &[4, 3, 2, 1]);
            assert!(!s.submit().unwrap());
            assert_eq!(s.locked(), i + 1 == MAX_FAILURES);
        }
        assert!(s.press(0).is_err());
        assert!(s.submit().is_err());
    }

    #[test]
    fn pin_validation() {
        let req = |pin: &str| SessionRequest {
            device: DeviceRef::default(),
            category: Category::C1,
            pin: pin.into(),
            shuffle_mode: ShuffleMode::PerAttempt,
            seed: None,
        };
        for bad in ["123", "12a4", "123456789", ""] {
            assert!(
                Session::new(&req(bad), DeviceProfile::nexus6()).is_err(),
                "{bad}"
            );
        }
        let mut s = Session::new(&req("0000"), DeviceProfile::nexus6()).unwrap();
        assert!(s.press(10).is_err());
    }
}
