//! The scripted message sequences.

use super::entities::{Cloud, Judge, Owner, User};
use super::message::{Payload, Verdict};
use super::{Bus, Part, Role, Scheme};
use crate::error::{Error, Result};
use crate::lut::{Decoder, MediaVector};

fn check_scheme(bus: &Bus, want: Scheme) -> Result<()> {
    if bus.scheme() != want {
        return Err(Error::protocol(format!(
            "bus is running scheme {}, not {want}",
            bus.scheme()
        )));
    }
    Ok(())
}

fn storage(scheme: Scheme, owner: &mut Owner, cloud: &mut Cloud, bus: &mut Bus) -> Result<()> {
    check_scheme(bus, scheme)?;
    for p in owner.storage_payloads(scheme)? {
        let received = bus.send(Part::Storage, Role::Owner, Role::Cloud, &p)?;
        cloud.receive_storage(received)?;
    }
    Ok(())
}

/// Media storage: the owner uploads `G`, `E²(Ê)` and each `(SK_m, c)`.
pub fn creams1_part1(owner: &mut Owner, cloud: &mut Cloud, bus: &mut Bus) -> Result<()> {
    storage(Scheme::One, owner, cloud, bus)
}

/// Media storage with encrypted media; the cloud derives `E²(c)` itself.
pub fn creams2_part1(owner: &mut Owner, cloud: &mut Cloud, bus: &mut Bus) -> Result<()> {
    storage(Scheme::Two, owner, cloud, bus)
}

/// Token grant that precedes sharing.
pub fn authorize(owner: &mut Owner, user: &mut User, media_id: &str, bus: &mut Bus) -> Result<()> {
    let req = bus.send(
        Part::Authorization,
        user.role(),
        Role::Owner,
        &user.access_request(media_id),
    )?;
    let grant = owner.grant(user.id(), &req)?;
    let grant = bus.send(Part::Authorization, Role::Owner, user.role(), &grant)?;
    user.accept_grant(grant)
}

fn share(
    scheme: Scheme,
    owner: &mut Owner,
    cloud: &mut Cloud,
    user: &mut User,
    media_id: &str,
    bus: &mut Bus,
) -> Result<MediaVector> {
    check_scheme(bus, scheme)?;
    let req = bus.send(Part::Sharing, user.role(), Role::Cloud, &user.share_request(media_id)?)?;
    cloud.receive_share_request(user.id(), req)?;
    let rk = bus.send(
        Part::Sharing,
        Role::Owner,
        Role::Cloud,
        &owner.delegate(user.id(), media_id)?,
    )?;
    cloud.receive_delegation(rk)?;
    let response = cloud.share(scheme, user.id(), media_id, bus)?;
    let response = bus.send(Part::Sharing, Role::Cloud, user.role(), &response)?;
    user.receive(response, owner.sys())
}

/// Sharing: the cloud ships the encrypted D-LUT, `c` and `SK_m`; the user
/// decrypts the D-LUT and joint-decrypts locally.
pub fn creams1_part2(
    owner: &mut Owner,
    cloud: &mut Cloud,
    user: &mut User,
    media_id: &str,
    bus: &mut Bus,
) -> Result<MediaVector> {
    share(Scheme::One, owner, cloud, user, media_id, bus)
}

/// Sharing: the D-LUT stays in the cloud, which returns `E¹_{PK_U}(m^k)`.
pub fn creams2_part2(
    owner: &mut Owner,
    cloud: &mut Cloud,
    user: &mut User,
    media_id: &str,
    bus: &mut Bus,
) -> Result<MediaVector> {
    share(Scheme::Two, owner, cloud, user, media_id, bus)
}

/// Arbitration of a suspect copy. Works for either scheme's stores.
#[allow(clippy::too_many_arguments)]
pub fn creams1_part3(
    owner: &Owner,
    cloud: &Cloud,
    judge: &Judge,
    media_id: &str,
    suspect: MediaVector,
    decoder: Decoder,
    tau: u32,
    bus: &mut Bus,
) -> Result<Verdict> {
    let req = bus.send(
        Part::Arbitration,
        Role::Owner,
        Role::Cloud,
        &Payload::ArbitrationRequest {
            media_id: media_id.to_string(),
        },
    )?;
    let material = bus.send(
        Part::Arbitration,
        Role::Cloud,
        Role::Owner,
        &cloud.arbitration_material(&req)?,
    )?;
    let bundle = owner.bundle(media_id, suspect, &material, decoder, tau)?;
    let bundle = bus.send(Part::Arbitration, Role::Owner, Role::Judge, &bundle)?;
    let verdict = Payload::Verdict(judge.arbitrate(&bundle)?);
    match bus.send(Part::Arbitration, Role::Judge, Role::Owner, &verdict)? {
        Payload::Verdict(v) => Ok(v),
        _ => unreachable!("a verdict decodes as a verdict"),
    }
}
