use std::collections::HashSet;

use super::{Arm, Block, DarkDecl, Kind, Network, NetlistError, Param, Value};

/// Entry and exit arm names of a block, or why it is not a clean stage.
pub(crate) fn block_boundary(net: &Network, b: &Block) -> Result<(String, String), String> {
    let inside: HashSet<&str> = b.elems.iter().map(|s| s.as_str()).collect();
    if b.elems.iter().any(|e| net.element(e).is_some_and(|x| x.kind == Kind::Source)) {
        return Err("a block cannot contain the source".into());
    }
    let entries: Vec<&Arm> = net
        .arms
        .iter()
        .filter(|a| !inside.contains(a.from.elem.as_str()) && inside.contains(a.to.elem.as_str()))
        .collect();
    let exits: Vec<&Arm> = net
        .arms
        .iter()
        .filter(|a| inside.contains(a.from.elem.as_str()) && !inside.contains(a.to.elem.as_str()))
        .collect();
    if entries.len() != 1 {
        return Err(format!("needs exactly one entry arm, has {}", entries.len()));
    }
    if exits.len() != 1 {
        return Err(format!("needs exactly one exit arm, has {}", exits.len()));
    }
    Ok((entries[0].name.clone(), exits[0].name.clone()))
}

fn primed(name: &str, k: usize) -> String {
    format!("{name}{}", "'".repeat(k))
}

pub(crate) fn chain(net: &Network, n: usize) -> Result<Network, NetlistError> {
    if n == 0 {
        return Err(NetlistError::ZeroChain);
    }
    let block = net.blocks.first().ok_or(NetlistError::NoBlock)?;
    let (entry, exit) =
        block_boundary(net, block).map_err(|m| NetlistError::BlockShape(block.name.clone(), m))?;
    if n == 1 {
        return Ok(net.clone());
    }
    let inside: HashSet<&str> = block.elems.iter().map(|s| s.as_str()).collect();
    let internal: Vec<&Arm> = net
        .arms
        .iter()
        .filter(|a| inside.contains(a.from.elem.as_str()) && inside.contains(a.to.elem.as_str()))
        .collect();
    let exit_arm = net.arm(&exit).unwrap().clone();
    let entry_arm = net.arm(&entry).unwrap().clone();
    let in_block = |name: &str| inside.contains(name) || internal.iter().any(|a| a.name == name) || name == exit;

    let mut out = net.clone();
    out.arms.retain(|a| a.name != exit);
    let mut new_blocks = Vec::new();

    for k in 1..n {
        for e in net.elements.iter().filter(|e| inside.contains(e.name.as_str())) {
            let mut c = e.clone();
            c.name = primed(&e.name, k);
            out.elements.push(c);
        }
        for a in &internal {
            let mut c = (*a).clone();
            c.name = primed(&a.name, k);
            c.from.elem = primed(&a.from.elem, k);
            c.to.elem = primed(&a.to.elem, k);
            out.arms.push(c);
        }
        new_blocks.push(Block {
            name: primed(&block.name, k),
            elems: block.elems.iter().map(|e| primed(e, k)).collect(),
        });
    }
    // links between consecutive copies, then the final exit
    for k in 0..n {
        let mut link = exit_arm.clone();
        link.name = primed(&exit, k);
        link.from.elem = primed(&exit_arm.from.elem, k);
        if k + 1 < n {
            link.to = entry_arm.to.clone();
            link.to.elem = primed(&entry_arm.to.elem, k + 1);
        }
        out.arms.push(link);
    }

    for c in &mut out.configs {
        let extra: Vec<_> = c
            .settings
            .iter()
            .filter(|s| inside.contains(s.elem.as_str()))
            .flat_map(|s| {
                (1..n).map(move |k| {
                    let mut t = s.clone();
                    t.elem = primed(&s.elem, k);
                    t
                })
            })
            .collect();
        c.settings.extend(extra);
    }
    out.darks = net
        .darks
        .iter()
        .map(|d| DarkDecl {
            config: d.config.clone(),
            targets: d
                .targets
                .iter()
                .flat_map(|t| {
                    if in_block(t) {
                        (0..n).map(|k| primed(t, k)).collect::<Vec<_>>()
                    } else {
                        vec![t.clone()]
                    }
                })
                .collect(),
        })
        .collect();
    out.blocks.extend(new_blocks);

    // the splitter fed by the source gets a free transmittance share
    let src = net.elements.iter().find(|e| e.kind == Kind::Source).map(|e| e.name.clone());
    let fed = src
        .and_then(|s| net.arms.iter().find(|a| a.from.elem == s))
        .map(|a| a.to.elem.clone());
    if let Some(bs) = fed {
        let pname = format!("{bs}_t");
        if let Some(e) = out.elements.iter_mut().find(|e| e.name == bs) {
            if let Kind::BeamSplitter { n: tn, .. } = &mut e.kind {
                *tn = Value::Param(pname.clone());
                if !out.params.iter().any(|p| p.name == pname) {
                    out.params.push(Param { name: pname, value: None });
                }
            }
        }
    }
    out.name = format!("{}_x{}", net.name, n);
    out.validate()?;
    Ok(out)
}
