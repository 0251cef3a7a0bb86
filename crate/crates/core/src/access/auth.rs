//! Salted password hashes.

use pbkdf2::pbkdf2_hmac;
use rand::RngCore;
use sha2::Sha256;

use crate::store::{User, UserOp};

pub const ITERATIONS: u32 = 100_000;

fn digest(password: &str, salt: &[u8]) -> [u8; 32] {
    let mut out = [0u8; 32];
    pbkdf2_hmac::<Sha256>(password.as_bytes(), salt, ITERATIONS, &mut out);
    out
}

/// A fresh random salt and the matching hash, both hex.
pub fn new_credentials(password: &str) -> (String, String) {
    let mut salt = [0u8; 16];
    rand::rng().fill_bytes(&mut salt);
    (hex::encode(salt), hex::encode(digest(password, &salt)))
}

pub fn add_user_op(id: &str, password: &str) -> UserOp {
    let (salt, hash) = new_credentials(password);
    UserOp::AddUser { id: id.to_string(), salt, hash }
}

pub fn set_password_op(id: &str, password: &str) -> UserOp {
    let (salt, hash) = new_credentials(password);
    UserOp::SetPassword { id: id.to_string(), salt, hash }
}

/// Constant-time comparison against the stored hash.
pub fn verify(user: &User, password: &str) -> bool {
    let (Ok(salt), Ok(want)) = (hex::decode(&user.salt), hex::decode(&user.hash)) else { return false };
    let got = digest(password, &salt);
    want.len() == got.len() && want.iter().zip(got).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_and_verify() {
        let (salt, hash) = new_credentials("pw");
        let u = User { id: "a".into(), salt, hash };
        assert!(verify(&u, "pw"));
        assert!(!verify(&u, "pW"));
        let (salt2, _) = new_credentials("pw");
        assert_ne!(u.salt, salt2);
        assert!(!verify(&User { salt: "zz".into(), ..u }, "pw"));
    }
}
