//! Login sessions: random tokens signed with the server secret.

use std::collections::HashMap;
use std::sync::Mutex;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Duration, Utc};
use hmac::{Hmac, Mac};
use rand::RngCore;
use sha2::Sha256;

type HmacSha256 = Hmac<Sha256>;

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub user: String,
    pub expires: DateTime<Utc>,
}

/// Tokens are `<id>.<mac>`: 128 random bits and an HMAC of them, both
/// base64url. The mac lets forged tokens be refused without a lookup.
pub struct Sessions {
    secret: Vec<u8>,
    ttl: Duration,
    live: Mutex<HashMap<String, Session>>,
}

impl Sessions {
    pub fn new(secret: &[u8], ttl: Duration) -> Sessions {
        Sessions { secret: secret.to_vec(), ttl, live: Mutex::new(HashMap::new()) }
    }

    fn mac(&self, id: &str) -> HmacSha256 {
        let mut m = HmacSha256::new_from_slice(&self.secret).expect("hmac takes any key length");
        m.update(id.as_bytes());
        m
    }

    pub fn issue(&self, user: &str, now: DateTime<Utc>) -> (String, Session) {
        let mut raw = [0u8; 16];
        rand::rng().fill_bytes(&mut raw);
        let id = URL_SAFE_NO_PAD.encode(raw);
        let sig = URL_SAFE_NO_PAD.encode(self.mac(&id).finalize().into_bytes());
        let session = Session { user: user.to_string(), expires: now + self.ttl };
        let mut live = self.live.lock().unwrap_or_else(|e| e.into_inner());
        live.retain(|_, s| s.expires > now);
        live.insert(id.clone(), session.clone());
        (format!("{id}.{sig}"), session)
    }

    /// The session behind `token`, if it is genuine and unexpired.
    pub fn resolve(&self, token: &str, now: DateTime<Utc>) -> Option<Session> {
        let (id, sig) = token.split_once('.')?;
        let sig = URL_SAFE_NO_PAD.decode(sig).ok()?;
        self.mac(id).verify_slice(&sig).ok()?;
        let mut live = self.live.lock().unwrap_or_else(|e| e.into_inner());
        match live.get(id) {
            Some(s) if s.expires > now => Some(s.clone()),
            Some(_) => {
                live.remove(id);
                None
            }
            None => None,
        }
    }

    pub fn revoke(&self, token: &str) {
        if let Some((id, _)) = token.split_once('.') {
            self.live.lock().unwrap_or_else(|e| e.into_inner()).remove(id);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn issue_resolve_expire() {
        let s = Sessions::new(b"k", Duration::hours(1));
        let now = Utc::now();
        let (tok, _) = s.issue("amy", now);
        assert_eq!(s.resolve(&tok, now).unwrap().user, "amy");
        assert!(s.resolve(&tok, now + Duration::hours(2)).is_none());
        assert!(s.resolve(&tok, now).is_none(), "expired sessions are dropped");

        let (tok, _) = s.issue("amy", now);
        let (id, _) = tok.split_once('.').unwrap();
        assert!(s.resolve(&format!("{id}.AAAA"), now).is_none());
        let other = Sessions::new(b"other", Duration::hours(1));
        assert!(other.resolve(&tok, now).is_none());
        s.revoke(&tok);
        assert!(s.resolve(&tok, now).is_none());
        assert!(s.resolve("garbage", now).is_none());
    }
}
