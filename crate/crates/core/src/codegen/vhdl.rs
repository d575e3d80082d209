// SPDX-License-Identifier: Apache-2.0

//! VHDL backend for hardware classes.
//!
//! Output is one file with three kinds of design unit:
//!
//! * package `<name>_interface`: the boundary constants from the manifest;
//! * entity `sm_<Class>` per hardware class: a clocked process that handles
//!   at most one incoming event per cycle and pulses a `valid` strobe on every
//!   send it performs;
//! * entity `<name>_hw_top`: one instance per hardware object, wired to the
//!   bus adapter, to each other, and to per-instance environment ports.

use std::fmt::Write;

use super::c::operand_type;
use super::manifest::InterfaceManifest;
use super::sanitize;
use crate::ir::{walk_stmts, ActionStmt, BinaryOp, ClassDef, Expr, Model, SignalDef, UnaryOp};
use crate::partition::{Direction, Domain, Partition};
use crate::scalar::{Literal, ScalarType};
use crate::typing::{infer, TypeEnv};
use crate::validate::ActionEnv;

const LIBRARIES: &str = "library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\n";

pub(super) fn entity_name(class: &str) -> String {
    format!("sm_{class}")
}

/// A generated port and the model element it came from.
pub(super) struct Port {
    pub name: String,
    pub origin: String,
    pub dir: &'static str,
    pub ty: ScalarType,
}

fn port_type(ty: ScalarType) -> String {
    match ty {
        ScalarType::Bool => "std_logic".to_string(),
        t => format!("unsigned({} downto 0)", t.width() - 1),
    }
}

fn var_type(ty: ScalarType) -> String {
    match ty {
        ScalarType::Bool => "boolean".to_string(),
        t => format!("unsigned({} downto 0)", t.width() - 1),
    }
}

fn constant(ty: ScalarType, value: u32) -> String {
    match ty {
        ScalarType::Bool => if value != 0 { "true" } else { "false" }.to_string(),
        t => {
            let digits = (t.width() / 4) as usize;
            let masked = value & t.max_value();
            format!("unsigned'(x\"{masked:0digits$X}\")")
        }
    }
}

/// `(target instance, signal)` pairs sent by a class, first-occurrence order.
fn send_targets<'m>(model: &'m Model, class: &'m ClassDef) -> Vec<(&'m str, &'m ClassDef, &'m SignalDef)> {
    let mut out: Vec<(&str, &ClassDef, &SignalDef)> = Vec::new();
    for st in &class.machine.states {
        for t in &st.transitions {
            walk_stmts(&t.actions, &mut |stmt| {
                if let ActionStmt::Send { instance, signal, .. } = stmt {
                    let Some(target) = model.class_of(instance) else {
                        return;
                    };
                    let Some(sig) = target.signal(signal) else {
                        return;
                    };
                    if !out.iter().any(|(i, _, s)| *i == instance && s.name == *signal) {
                        out.push((instance.as_str(), target, sig));
                    }
                }
            });
        }
    }
    out
}

fn out_prefix(instance: &str, signal: &str) -> String {
    format!("out_{instance}_{signal}")
}

/// Ports of a class entity other than `clk` and `rst`.
pub(super) fn class_ports(model: &Model, class: &ClassDef) -> Vec<Port> {
    let mut ports = Vec::new();
    for sig in &class.signals {
        ports.push(Port {
            name: format!("in_{}_valid", sig.name),
            origin: format!("{}.{}", class.name, sig.name),
            dir: "in",
            ty: ScalarType::Bool,
        });
        for p in &sig.params {
            ports.push(Port {
                name: format!("in_{}_{}", sig.name, p.name),
                origin: format!("{}.{}.{}", class.name, sig.name, p.name),
                dir: "in",
                ty: p.ty,
            });
        }
    }
    for (instance, _, sig) in send_targets(model, class) {
        let prefix = out_prefix(instance, &sig.name);
        ports.push(Port {
            name: format!("{prefix}_valid"),
            origin: format!("{} send {instance}.{}", class.name, sig.name),
            dir: "out",
            ty: ScalarType::Bool,
        });
        for p in &sig.params {
            ports.push(Port {
                name: format!("{prefix}_{}", p.name),
                origin: format!("{} send {instance}.{}({})", class.name, sig.name, p.name),
                dir: "out",
                ty: p.ty,
            });
        }
    }
    ports
}

pub fn emit_vhdl(name: &str, model: &Model, partition: &Partition, manifest: &InterfaceManifest) -> String {
    let base = sanitize(name);
    let mut v = String::new();
    let _ = writeln!(v, "-- {name}_hw.vhd: hardware half of model `{name}`. Generated; do not edit.");
    let _ = writeln!(v, "-- Interface manifest {}.\n", manifest.model_hash);
    package(&mut v, &base, manifest);
    let hw: Vec<&ClassDef> = model
        .classes
        .iter()
        .filter(|c| partition.domain(&c.name) == Domain::Hw)
        .collect();
    for class in &hw {
        entity(&mut v, &base, model, class);
    }
    if !hw.is_empty() {
        top(&mut v, &base, model, partition, manifest);
    }
    v
}

fn package(v: &mut String, base: &str, manifest: &InterfaceManifest) {
    let widest = manifest.signals.iter().map(|s| s.payload_total_bits).max().unwrap_or(0);
    v.push_str(LIBRARIES);
    let _ = writeln!(v, "\npackage {base}_interface is");
    for s in &manifest.signals {
        let _ = writeln!(v, "  constant {} : natural := {};", s.macro_name(), s.id);
        let _ = writeln!(v, "  constant {} : natural := {};", s.bits_name(), s.payload_total_bits);
    }
    let _ = writeln!(v, "  constant BUS_PAYLOAD_BITS : natural := {};", widest.max(1));
    v.push_str("  subtype bus_payload_t is std_logic_vector(BUS_PAYLOAD_BITS - 1 downto 0);\n");
    v.push_str("  function to_sl(b : boolean) return std_logic;\n");
    let _ = writeln!(v, "end package {base}_interface;\n");
    let _ = writeln!(v, "package body {base}_interface is");
    v.push_str("  function to_sl(b : boolean) return std_logic is\n  begin\n    if b then\n      return '1';\n    else\n      return '0';\n    end if;\n  end function;\n");
    let _ = writeln!(v, "end package body {base}_interface;\n");
}

fn use_package(v: &mut String, base: &str) {
    v.push_str(LIBRARIES);
    let _ = writeln!(v, "use work.{base}_interface.all;\n");
}

fn entity(v: &mut String, base: &str, model: &Model, class: &ClassDef) {
    let ent = entity_name(&class.name);
    let ports = class_ports(model, class);
    use_package(v, base);
    let _ = writeln!(v, "entity {ent} is\n  port (\n    clk : in std_logic;");
    v.push_str("    rst : in std_logic");
    for p in &ports {
        let _ = write!(v, ";\n    {} : {} {}", p.name, p.dir, port_type(p.ty));
    }
    let _ = writeln!(v, "\n  );\nend entity {ent};\n");

    let _ = writeln!(v, "architecture rtl of {ent} is");
    let states: Vec<String> = class.machine.states.iter().map(|s| format!("st_{}", s.name)).collect();
    let _ = writeln!(v, "  type state_t is ({});", states.join(", "));
    v.push_str("  signal state : state_t;\n");
    for a in &class.attributes {
        let _ = writeln!(v, "  signal a_{} : {};", a.name, var_type(a.ty));
    }
    v.push_str("begin\n  step : process (clk)\n    variable v_state : state_t;\n");
    for a in &class.attributes {
        let _ = writeln!(v, "    variable v_{} : {};", a.name, var_type(a.ty));
    }
    v.push_str("  begin\n    if rising_edge(clk) then\n");
    for p in ports.iter().filter(|p| p.dir == "out" && p.name.ends_with("_valid")) {
        let _ = writeln!(v, "      {} <= '0';", p.name);
    }
    v.push_str("      if rst = '1' then\n");
    let _ = writeln!(v, "        state <= st_{};", class.machine.initial);
    for a in &class.attributes {
        let raw = match a.default {
            Literal::Bool(b) => u32::from(b),
            Literal::Int(n) => n,
        };
        let _ = writeln!(v, "        a_{} <= {};", a.name, constant(a.ty, raw));
    }
    v.push_str("      else\n        v_state := state;\n");
    for a in &class.attributes {
        let _ = writeln!(v, "        v_{0} := a_{0};", a.name);
    }
    // The bus adapter presents at most one event per cycle; earlier signals
    // win if the environment violates that.
    let mut first = true;
    for sig in &class.signals {
        let kw = if first { "if" } else { "elsif" };
        first = false;
        let _ = writeln!(v, "        {kw} in_{}_valid = '1' then", sig.name);
        let _ = writeln!(v, "          case state is");
        let env = ActionEnv { class, trigger: sig };
        for st in &class.machine.states {
            let Some(t) = st.transition_on(&sig.name) else {
                continue;
            };
            let _ = writeln!(v, "            when st_{} =>", st.name);
            let ctx = Ctx { model, env: &env, sig };
            ctx.stmts(v, &t.actions, 14);
            let _ = writeln!(v, "              v_state := st_{};", t.target);
        }
        v.push_str("            when others =>\n              null;\n          end case;\n");
    }
    if !first {
        v.push_str("        end if;\n");
    }
    v.push_str("        state <= v_state;\n");
    for a in &class.attributes {
        let _ = writeln!(v, "        a_{0} <= v_{0};", a.name);
    }
    v.push_str("      end if;\n    end if;\n  end process step;\n");
    let _ = writeln!(v, "end architecture rtl;\n");
}

struct Ctx<'a> {
    model: &'a Model,
    env: &'a ActionEnv<'a>,
    sig: &'a SignalDef,
}

impl Ctx<'_> {
    fn stmts(&self, v: &mut String, block: &[ActionStmt], indent: usize) {
        let pad = " ".repeat(indent);
        if block.is_empty() {
            let _ = writeln!(v, "{pad}null;");
        }
        for stmt in block {
            match stmt {
                ActionStmt::Assign { attr, value } => {
                    let Some(ty) = self.env.attr_type(attr) else {
                        continue;
                    };
                    let _ = writeln!(v, "{pad}v_{attr} := {};", self.expr(value, Some(ty)));
                }
                ActionStmt::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let _ = writeln!(v, "{pad}if {} then", self.expr(cond, Some(ScalarType::Bool)));
                    self.stmts(v, then_branch, indent + 2);
                    if let Some(else_branch) = else_branch {
                        let _ = writeln!(v, "{pad}else");
                        self.stmts(v, else_branch, indent + 2);
                    }
                    let _ = writeln!(v, "{pad}end if;");
                }
                ActionStmt::Send {
                    instance,
                    signal,
                    args,
                } => {
                    let Some(target) = self.model.class_of(instance).and_then(|c| c.signal(signal)) else {
                        continue;
                    };
                    // A second send of the same signal to the same instance in
                    // one step overwrites the first.
                    let prefix = out_prefix(instance, signal);
                    let _ = writeln!(v, "{pad}{prefix}_valid <= '1';");
                    for (arg, p) in args.iter().zip(&target.params) {
                        let value = self.expr(arg, Some(p.ty));
                        let value = if p.ty.is_bool() { format!("to_sl({value})") } else { value };
                        let _ = writeln!(v, "{pad}{prefix}_{} <= {value};", p.name);
                    }
                }
            }
        }
    }

    /// Booleans are VHDL `boolean`, integers `unsigned` of their own width;
    /// numeric_std `+`, `-` wrap at that width and `*` is resized back to it.
    fn expr(&self, e: &Expr, context: Option<ScalarType>) -> String {
        let ty_of = |e: &Expr| infer(e, self.env).map_or(ScalarType::U32, |t| t.settle(context));
        match e {
            Expr::Lit(Literal::Bool(b)) => b.to_string(),
            Expr::Lit(Literal::Int(n)) => constant(ty_of(e), *n),
            Expr::Attr(name) => format!("v_{name}"),
            Expr::Param(name) => {
                let port = format!("in_{}_{name}", self.sig.name);
                match self.env.param_type(name) {
                    Some(ScalarType::Bool) => format!("({port} = '1')"),
                    _ => port,
                }
            }
            Expr::Unary(UnaryOp::Not, inner) => format!("(not {})", self.expr(inner, Some(ScalarType::Bool))),
            Expr::Unary(UnaryOp::Neg, inner) => {
                let ty = ty_of(e);
                format!("({} - {})", constant(ty, 0), self.expr(inner, Some(ty)))
            }
            Expr::Binary(op, l, r) if op.is_logical() => {
                let word = if *op == BinaryOp::And { "and" } else { "or" };
                format!(
                    "({} {word} {})",
                    self.expr(l, Some(ScalarType::Bool)),
                    self.expr(r, Some(ScalarType::Bool))
                )
            }
            Expr::Binary(op, l, r) if op.is_arithmetic() => {
                let ty = ty_of(e);
                let (a, b) = (self.expr(l, Some(ty)), self.expr(r, Some(ty)));
                match op {
                    BinaryOp::Mul => format!("resize({a} * {b}, {})", ty.width()),
                    _ => format!("({a} {} {b})", op.symbol()),
                }
            }
            Expr::Binary(op, l, r) => {
                let operand = operand_type(l, r, self.env);
                let sym = match op {
                    BinaryOp::Eq => "=",
                    BinaryOp::Ne => "/=",
                    other => other.symbol(),
                };
                format!(
                    "({} {sym} {})",
                    self.expr(l, Some(operand)),
                    self.expr(r, Some(operand))
                )
            }
        }
    }
}

/// One driver of an instance's input port group.
struct Source {
    valid: String,
    /// One expression per signal parameter, already of the port type.
    params: Vec<String>,
}

fn top(v: &mut String, base: &str, model: &Model, partition: &Partition, manifest: &InterfaceManifest) {
    let ent = format!("{base}_hw_top");
    let hw_instances: Vec<_> = model
        .instances
        .iter()
        .filter(|i| partition.domain(&i.class) == Domain::Hw)
        .collect();
    let slot = |instance: &str| {
        let class = model.instance(instance).map(|i| i.class.as_str()).unwrap_or("");
        model.instances_of(class).position(|i| i.name == instance).unwrap_or(0)
    };

    use_package(v, base);
    let _ = writeln!(v, "entity {ent} is\n  port (");
    v.push_str("    clk : in std_logic;\n    rst : in std_logic;\n");
    v.push_str("    -- software to hardware\n");
    v.push_str("    bus_in_valid : in std_logic;\n    bus_in_id : in natural;\n    bus_in_instance : in natural;\n    bus_in_payload : in bus_payload_t;\n");
    v.push_str("    -- hardware to software; one message per cycle\n");
    v.push_str("    bus_out_valid : out std_logic;\n    bus_out_id : out natural;\n    bus_out_instance : out natural;\n    bus_out_payload : out bus_payload_t");
    for inst in &hw_instances {
        let Some(class) = model.class(&inst.class) else {
            continue;
        };
        for sig in &class.signals {
            let _ = write!(v, ";\n    env_{}_{}_valid : in std_logic", inst.name, sig.name);
            for p in &sig.params {
                let _ = write!(v, ";\n    env_{}_{}_{} : in {}", inst.name, sig.name, p.name, port_type(p.ty));
            }
        }
    }
    let _ = writeln!(v, "\n  );\nend entity {ent};\n");

    // Internal wiring: `w_` nets feed instance inputs, `o_` nets carry
    // instance outputs.
    let mut decls = String::new();
    let mut body = String::new();
    // (net, SIG_ macro, receiver slot, [(port, bit offset, width, is bool)])
    type Outbound = (String, String, usize, Vec<(String, u32, u32, bool)>);
    let mut outbound: Vec<Outbound> = Vec::new();

    for inst in &hw_instances {
        let Some(class) = model.class(&inst.class) else {
            continue;
        };
        for (target, target_class, sig) in send_targets(model, class) {
            let net = format!("o_{}_{}_{}", inst.name, target, sig.name);
            let _ = writeln!(decls, "  signal {net}_valid : std_logic;");
            for p in &sig.params {
                let _ = writeln!(decls, "  signal {net}_{} : {};", p.name, port_type(p.ty));
            }
            if partition.domain(&target_class.name) == Domain::Sw {
                if let Some(entry) = manifest.signal(&target_class.name, &sig.name) {
                    let fields = entry
                        .payload
                        .iter()
                        .zip(&sig.params)
                        .map(|(f, p)| (format!("{net}_{}", p.name), f.bit_offset, f.width_bits, p.ty.is_bool()))
                        .collect();
                    outbound.push((net.clone(), entry.macro_name(), slot(target), fields));
                }
            }
        }
    }

    for inst in &hw_instances {
        let Some(class) = model.class(&inst.class) else {
            continue;
        };
        for sig in &class.signals {
            let mut sources = vec![Source {
                valid: format!("env_{}_{}_valid", inst.name, sig.name),
                params: sig
                    .params
                    .iter()
                    .map(|p| format!("env_{}_{}_{}", inst.name, sig.name, p.name))
                    .collect(),
            }];
            if let Some(entry) = manifest
                .signal(&class.name, &sig.name)
                .filter(|e| e.direction == Direction::SwToHw)
            {
                let net = format!("b_{}_{}", inst.name, sig.name);
                let _ = writeln!(decls, "  signal {net}_valid : std_logic;");
                let _ = writeln!(
                    body,
                    "  {net}_valid <= '1' when bus_in_valid = '1' and bus_in_id = {} and bus_in_instance = {} else '0';",
                    entry.macro_name(),
                    slot(&inst.name)
                );
                let params = entry
                    .payload
                    .iter()
                    .zip(&sig.params)
                    .map(|(f, p)| {
                        if p.ty.is_bool() {
                            format!("bus_in_payload({})", f.bit_offset)
                        } else {
                            format!(
                                "unsigned(bus_in_payload({} downto {}))",
                                f.bit_offset + f.width_bits - 1,
                                f.bit_offset
                            )
                        }
                    })
                    .collect();
                sources.push(Source {
                    valid: format!("{net}_valid"),
                    params,
                });
            }
            for sender in &hw_instances {
                let Some(sender_class) = model.class(&sender.class) else {
                    continue;
                };
                let sends = send_targets(model, sender_class)
                    .iter()
                    .any(|(t, _, s)| *t == inst.name && s.name == sig.name);
                if sends {
                    let net = format!("o_{}_{}_{}", sender.name, inst.name, sig.name);
                    sources.push(Source {
                        valid: format!("{net}_valid"),
                        params: sig.params.iter().map(|p| format!("{net}_{}", p.name)).collect(),
                    });
                }
            }

            let net = format!("w_{}_{}", inst.name, sig.name);
            let _ = writeln!(decls, "  signal {net}_valid : std_logic;");
            let valids: Vec<&str> = sources.iter().map(|s| s.valid.as_str()).collect();
            let _ = writeln!(body, "  {net}_valid <= {};", valids.join(" or "));
            for (i, p) in sig.params.iter().enumerate() {
                let _ = writeln!(decls, "  signal {net}_{} : {};", p.name, port_type(p.ty));
                let _ = write!(body, "  {net}_{} <= ", p.name);
                let (last, rest) = sources.split_last().expect("environment source always present");
                for s in rest {
                    let _ = write!(body, "{} when {} = '1' else ", s.params[i], s.valid);
                }
                let _ = writeln!(body, "{};", last.params[i]);
            }
        }
    }

    // Outbound bus multiplexer: lowest-listed sender wins a contended cycle.
    if outbound.is_empty() {
        body.push_str("  bus_out_valid <= '0';\n  bus_out_id <= 0;\n  bus_out_instance <= 0;\n  bus_out_payload <= (others => '0');\n");
    } else {
        let valids: Vec<String> = outbound.iter().map(|(net, ..)| format!("{net}_valid")).collect();
        let _ = writeln!(body, "  bus_out_valid <= {};", valids.join(" or "));
        let mut ids = String::new();
        let mut insts = String::new();
        let mut payloads = String::new();
        for (net, macro_name, slot, fields) in &outbound {
            let pk = format!("{net}_packed");
            let _ = writeln!(decls, "  signal {pk} : bus_payload_t;");
            let mut covered = 0;
            for (port, offset, width, is_bool) in fields {
                if *is_bool {
                    let _ = writeln!(body, "  {pk}({offset}) <= {port};");
                } else {
                    let _ = writeln!(
                        body,
                        "  {pk}({} downto {offset}) <= std_logic_vector({port});",
                        offset + width - 1
                    );
                }
                covered = offset + width;
            }
            let _ = writeln!(body, "  {pk}(BUS_PAYLOAD_BITS - 1 downto {covered}) <= (others => '0');");
            let _ = write!(ids, "{macro_name} when {net}_valid = '1' else ");
            let _ = write!(insts, "{slot} when {net}_valid = '1' else ");
            let _ = write!(payloads, "{pk} when {net}_valid = '1' else ");
        }
        let _ = writeln!(body, "  bus_out_id <= {ids}0;");
        let _ = writeln!(body, "  bus_out_instance <= {insts}0;");
        let _ = writeln!(body, "  bus_out_payload <= {payloads}(others => '0');");
    }

    for inst in &hw_instances {
        let Some(class) = model.class(&inst.class) else {
            continue;
        };
        let _ = writeln!(body, "\n  u_{} : entity work.{}\n    port map (", inst.name, entity_name(&class.name));
        body.push_str("      clk => clk,\n      rst => rst");
        for p in class_ports(model, class) {
            let net = if let Some(rest) = p.name.strip_prefix("in_") {
                format!("w_{}_{rest}", inst.name)
            } else {
                let rest = p.name.strip_prefix("out_").unwrap_or(&p.name);
                format!("o_{}_{rest}", inst.name)
            };
            let _ = write!(body, ",\n      {} => {net}", p.name);
        }
        body.push_str("\n    );\n");
    }

    let _ = writeln!(v, "architecture structural of {ent} is");
    v.push_str(&decls);
    v.push_str("begin\n");
    v.push_str(&body);
    let _ = writeln!(v, "end architecture structural;");
}
