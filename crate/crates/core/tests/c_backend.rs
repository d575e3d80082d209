// SPDX-License-Identifier: Apache-2.0

//! Compiles the generated C with the system C compiler and runs it against
//! the reference executor. Skipped when no `cc` is on the PATH.

mod common;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::Command;

use common::{corpus, Case};
use smc::codegen::{generate, InterfaceManifest};
use smc::executor::Outcome;
use smc::partition::{cosim, Direction, Domain, Partition};
use smc::scenario::Scenario;
use smc::{ExecConfig, Literal, Value};

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

fn c_value(v: &Value) -> u64 {
    match *v {
        Value::Bool(b) => b as u64,
        Value::U8(x) => x as u64,
        Value::U16(x) => x as u64,
        Value::U32(x) => x as u64,
    }
}

fn c_literal(l: &Literal) -> String {
    match *l {
        Literal::Bool(b) => (b as u8).to_string(),
        Literal::Int(n) => format!("{n}u"),
    }
}

fn words(bits: u32) -> usize {
    bits.div_ceil(32).max(1) as usize
}

/// Test driver: feeds the scenario's injections at their dispatch steps,
/// runs to quiescence, then prints every software attribute and each bus
/// send.
fn driver(case: &Case, partition: &Partition, scenario: &Scenario, manifest: &InterfaceManifest) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "#include <stdio.h>\n#include \"{}_sw.c\"\n", case.name);
    let table: Vec<String> = manifest.signals.iter().map(|m| words(m.payload_total_bits).to_string()).collect();
    let _ = writeln!(s, "static const unsigned bus_words[] = {{ {}0 }};", table.iter().map(|w| format!("{w}, ")).collect::<String>());
    s.push_str(
        "void bus_send(uint32_t id, uint32_t instance, const uint32_t *payload)\n{\n    unsigned i;\n    printf(\"bus %u %u\", (unsigned)id, (unsigned)instance);\n    for (i = 0; i < bus_words[id]; i++) printf(\" %lu\", (unsigned long)payload[i]);\n    printf(\"\\n\");\n}\n\n",
    );
    s.push_str("int main(void)\n{\n    unsigned long steps = 0;\n    sm_init();\n");
    for inj in &scenario.injections {
        let args: Vec<String> = inj.args.iter().map(c_literal).collect();
        if inj.at > 0 {
            let _ = writeln!(s, "    while (steps < {}ul && sm_step()) steps++;", inj.at);
        }
        let _ = writeln!(s, "    inject_{}_{}({});", inj.instance, inj.signal, args.join(", "));
    }
    s.push_str("    while (sm_step()) steps++;\n");
    for inst in &case.model.instances {
        if partition.domain(&inst.class) != Domain::Sw {
            continue;
        }
        let class = case.model.class(&inst.class).unwrap();
        for a in &class.attributes {
            let _ = writeln!(
                s,
                "    printf(\"{0}.{1}=%lu\\n\", (unsigned long)sm_inst_{0}.a_{1});",
                inst.name, a.name
            );
        }
    }
    s.push_str("    printf(\"steps=%lu\\n\", steps);\n    return 0;\n}\n");
    s
}

fn compile_and_run(dir: &Path, case: &Case, main: &str) -> String {
    fs::write(dir.join("main.c"), main).unwrap();
    let exe = dir.join("a.out");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-pedantic", "-o"])
        .arg(&exe)
        .arg(dir.join("main.c"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}: {}", case.name, String::from_utf8_lossy(&out.stderr));
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

/// Packs argument values at the manifest's bit offsets.
fn pack(args: &[Value], manifest: &InterfaceManifest, id: u32) -> Vec<u64> {
    let sig = &manifest.signals[id as usize];
    let mut w = vec![0u64; words(sig.payload_total_bits)];
    for (field, v) in sig.payload.iter().zip(args) {
        let v = c_value(v);
        for bit in 0..field.width_bits {
            if v >> bit & 1 == 1 {
                let at = field.bit_offset + bit;
                w[(at / 32) as usize] |= 1 << (at % 32);
            }
        }
    }
    w
}

fn expected_output(case: &Case, partition: &Partition, scenario: &Scenario, manifest: &InterfaceManifest) -> Vec<String> {
    let pt = cosim(&case.model, partition, scenario, &ExecConfig::default(), 1).unwrap();
    assert_eq!(pt.trace.outcome, Outcome::Quiescent);
    let mut lines = Vec::new();
    for (event, placement) in pt.trace.events.iter().zip(&pt.placements) {
        if placement.bus.is_none() {
            continue;
        }
        let env = &event.envelope;
        let class = &case.model.class_of(&env.receiver).unwrap().name;
        let id = manifest.signal(class, &env.signal).unwrap().id;
        let slot = case
            .model
            .instances_of(class)
            .position(|i| i.name == env.receiver)
            .unwrap();
        let words: Vec<String> = pack(&env.args, manifest, id).iter().map(u64::to_string).collect();
        lines.push(format!("bus {id} {slot} {}", words.join(" ")));
    }
    lines.sort();
    for inst in &pt.trace.final_state.instances {
        let class = &case.model.class_of(&inst.name).unwrap().name;
        if partition.domain(class) == Domain::Sw {
            for (attr, v) in &inst.attrs {
                lines.push(format!("{}.{}={}", inst.name, attr, c_value(v)));
            }
        }
    }
    let sw_steps = pt.placements.iter().filter(|p| p.domain == Domain::Sw).count();
    lines.push(format!("steps={sw_steps}"));
    lines
}

fn normalize(output: &str) -> Vec<String> {
    let (mut bus, rest): (Vec<String>, Vec<String>) = output
        .lines()
        .map(|l| l.trim_end().to_string())
        .partition(|l| l.starts_with("bus "));
    bus.sort();
    bus.extend(rest);
    bus
}

/// The software half is self-contained when nothing flows back from
/// hardware and the scenario only stimulates software instances at step 0.
fn self_contained(case: &Case, partition: &Partition, scenario: &Scenario, manifest: &InterfaceManifest) -> bool {
    manifest.signals.iter().all(|s| s.direction == Direction::SwToHw)
        && scenario.injections.iter().all(|i| {
            i.at == 0 && partition.domain(&case.model.class_of(&i.instance).unwrap().name) == Domain::Sw
        })
}

#[test]
fn generated_c_matches_the_executor() {
    if !have_cc() {
        eprintln!("skipped: no C compiler");
        return;
    }
    let mut checked = 0;
    for case in corpus() {
        for partition in Partition::enumerate(&case.model) {
            let all_sw = partition.iter().all(|(_, d)| d == Domain::Sw);
            let out = generate(&case.name, &case.model, &partition).unwrap();
            for (stem, scenario) in &case.scenarios {
                let wanted = if all_sw {
                    true
                } else {
                    scenario.confluent && self_contained(&case, &partition, scenario, &out.manifest)
                };
                if !wanted {
                    continue;
                }
                let dir = tempfile::tempdir().unwrap();
                fs::write(dir.path().join(format!("{}_sw.c", case.name)), &out.c_source).unwrap();
                fs::write(dir.path().join(format!("{}_sw.h", case.name)), &out.c_header).unwrap();
                let main = driver(&case, &partition, scenario, &out.manifest);
                let got = normalize(&compile_and_run(dir.path(), &case, &main));
                let want = expected_output(&case, &partition, scenario, &out.manifest);
                assert_eq!(got, want, "{} {stem} {:?}", case.name, partition);
                checked += 1;
            }
        }
    }
    assert!(checked >= 10, "only {checked} cases");
    eprintln!("{checked} C builds matched");
}

#[test]
fn bus_input_reaches_software() {
    if !have_cc() {
        return;
    }
    let case = corpus().into_iter().find(|c| c.name == "pingpong").unwrap();
    let partition = Partition::from_mask(&case.model, 0b01);
    let out = generate("pingpong", &case.model, &partition).unwrap();
    assert_eq!(out.manifest.signals[0].direction, Direction::HwToSw);
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pingpong_sw.c"), &out.c_source).unwrap();
    fs::write(dir.path().join("pingpong_sw.h"), &out.c_header).unwrap();
    let main = "#include <stdio.h>\n#include \"pingpong_sw.c\"\n\
        void bus_send(uint32_t id, uint32_t instance, const uint32_t *payload)\n\
        { (void)id; (void)instance; (void)payload; }\n\
        int main(void)\n{\n    uint32_t none[1] = {0u};\n    sm_init();\n\
        dispatch_from_bus(SIG_PONG_HIT, 0u, none);\n    dispatch_from_bus(SIG_PONG_HIT, 0u, none);\n\
        sm_run();\n    printf(\"%lu\\n\", (unsigned long)sm_inst_pong.a_hits);\n    return 0;\n}\n";
    assert_eq!(compile_and_run(dir.path(), &case, main).trim(), "2");
}
