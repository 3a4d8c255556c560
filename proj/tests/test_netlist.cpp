#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "setsim/netlist.hpp"

using namespace setsim;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Counts bench statements by scanning lines, independent of the parser.
struct LineCounts {
    int inputs = 0, outputs = 0, gates = 0, flops = 0;
};

LineCounts count_lines(const std::string& text) {
    LineCounts n;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = line.substr(0, line.find('#'));
        if (line.find("INPUT(") != std::string::npos) ++n.inputs;
        else if (line.find("OUTPUT(") != std::string::npos) ++n.outputs;
        else if (line.find("DFF(") != std::string::npos) ++n.flops;
        else if (line.find('=') != std::string::npos) ++n.gates;
    }
    return n;
}

bool has_code(const std::vector<Diagnostic>& v, const std::string& code) {
    return std::any_of(v.begin(), v.end(), [&](const Diagnostic& d) { return d.code == code; });
}

std::size_t position(const std::vector<std::string>& order, const std::string& id) {
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), id) - order.begin());
}

}  // namespace

TEST_CASE("parse: single-line NAND") {
    Circuit c = parse_bench("INPUT(a) INPUT(b) OUTPUT(y) y=NAND(a,b)");
    CHECK(c.primary_inputs().size() == 2);
    CHECK(c.primary_outputs().size() == 1);
    CHECK(c.gates().size() == 1);
    CHECK(c.flops().empty());
    CHECK(c.gates()[0].kind == GateKind::Nand);
}

TEST_CASE("parse: single flop") {
    Circuit c = parse_bench("INPUT(d) OUTPUT(q) q=DFF(d)");
    CHECK(c.primary_inputs().size() == 1);
    CHECK(c.primary_outputs().size() == 1);
    CHECK(c.gates().empty());
    CHECK(c.flops().size() == 1);
}

TEST_CASE("parse: bundled corpus counts match a line scan") {
    for (const char* name : {"c17", "s27", "decoder3to8", "lfsr8", "fsm"}) {
        CAPTURE(name);
        std::string text = slurp(std::string(SETSIM_DATA_DIR) + "/bench/" + name + ".bench");
        LineCounts want = count_lines(text);
        Circuit c = parse_bench(text, name);
        CHECK(static_cast<int>(c.primary_inputs().size()) == want.inputs);
        CHECK(static_cast<int>(c.primary_outputs().size()) == want.outputs);
        CHECK(static_cast<int>(c.gates().size()) == want.gates);
        CHECK(static_cast<int>(c.flops().size()) == want.flops);
        CHECK(validate(c).ok());
    }
}

TEST_CASE("parse: c17 has 5 inputs, 2 outputs, 6 NANDs") {
    Circuit c = load_bench_file(std::string(SETSIM_DATA_DIR) + "/bench/c17.bench");
    CHECK(c.name() == "c17");
    CHECK(c.primary_inputs().size() == 5);
    CHECK(c.primary_outputs().size() == 2);
    CHECK(c.gates().size() == 6);
    CHECK(std::all_of(c.gates().begin(), c.gates().end(), [](const Gate& g) { return g.kind == GateKind::Nand; }));
    // declaration order kept
    CHECK(c.net_name(c.primary_inputs()[3]) == "6");
    CHECK(c.net_name(c.primary_outputs()[1]) == "23");
}

TEST_CASE("parse: errors carry codes and positions") {
    SUBCASE("syntax") {
        try {
            (void)parse_bench("INPUT(a)\nOUTPUT(y)\ny = NAND(a,\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.code() == "E_PARSE");
            CHECK(e.location().line >= 3);
        }
    }
    SUBCASE("unknown kind") {
        try {
            (void)parse_bench("INPUT(a)\nOUTPUT(y)\ny = MUX(a, a)\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.location().line == 3);
            CHECK(std::string(e.what()).find("MUX") != std::string::npos);
        }
    }
    SUBCASE("duplicate driver") {
        CHECK_THROWS_AS((void)parse_bench("INPUT(a) OUTPUT(y) y=NOT(a) y=BUF(a)"), ParseError);
    }
    SUBCASE("undeclared net") {
        CHECK_THROWS_AS((void)parse_bench("INPUT(a) OUTPUT(y) y=AND(a,b)"), ParseError);
    }
    SUBCASE("NOT with two inputs is a validation error") {
        auto d = validate(parse_bench_unchecked("INPUT(a) OUTPUT(y) y=NOT(a,a)"));
        CHECK(has_code(d.errors, "bad-fanin"));
    }
}

TEST_CASE("parse: aliases, case and comments") {
    Circuit c = parse_bench("# header\nINPUT(a)  # trailing\nOUTPUT(z)\nb = buff(a)\nz = Inv(b)\n");
    REQUIRE(c.gates().size() == 2);
    CHECK(c.gates()[0].kind == GateKind::Buf);
    CHECK(c.gates()[1].kind == GateKind::Not);
}

TEST_CASE("validate examples") {
    SUBCASE("c17 is clean") {
        auto d = validate(load_bench_file(std::string(SETSIM_DATA_DIR) + "/bench/c17.bench"));
        CHECK(d.errors.empty());
    }
    SUBCASE("duplicate driver names the net") {
        auto d = validate(parse_bench_unchecked("INPUT(a) OUTPUT(y) y=NOT(a) y=BUF(a)"));
        REQUIRE(d.errors.size() == 1);
        CHECK(d.errors[0].code == "duplicate-driver");
        CHECK(d.errors[0].message.find("'y'") != std::string::npos);
    }
    SUBCASE("two-inverter loop") {
        auto d = validate(parse_bench_unchecked("INPUT(x) OUTPUT(a) a=NOT(b) b=NOT(a)"));
        REQUIRE(d.errors.size() == 1);
        CHECK(d.errors[0].code == "combinational-cycle");
    }
    SUBCASE("loop through a flop is fine") {
        auto d = validate(parse_bench("INPUT(x) OUTPUT(q) q=DFF(n) n=NOT(q)"));
        CHECK(d.ok());
    }
    SUBCASE("undeclared net") {
        auto d = validate(parse_bench_unchecked("INPUT(a) OUTPUT(y) y=AND(a,b)"));
        CHECK(has_code(d.errors, "undeclared-net"));
    }
    SUBCASE("unused net is only a warning") {
        auto d = validate(parse_bench("INPUT(a) INPUT(b) OUTPUT(y) y=NOT(a)"));
        CHECK(d.ok());
        CHECK(has_code(d.warnings, "unused-net"));
    }
    SUBCASE("validate leaves the circuit alone") {
        Circuit c = parse_bench_unchecked("INPUT(x) OUTPUT(a) a=NOT(b) b=NOT(a)");
        std::string before = to_bench(c);
        (void)validate(c);
        CHECK(to_bench(c) == before);
    }
}

TEST_CASE("wrap_combinational examples") {
    SUBCASE("NAND") {
        Circuit w = wrap_combinational(parse_bench("INPUT(a) INPUT(b) OUTPUT(y) y=NAND(a,b)"));
        CHECK(w.flops().size() == 3);
        CHECK(w.gates().size() == 1);
        CHECK(validate(w).ok());
    }
    SUBCASE("pass-through: two flops in series") {
        Circuit w = wrap_combinational(parse_bench("OUTPUT(a) INPUT(a)"));
        REQUIRE(w.flops().size() == 2);
        CHECK(w.gates().empty());
        const auto& f = w.flops();
        // one flop feeds the other
        bool series = f[0].output == f[1].data || f[1].output == f[0].data;
        CHECK(series);
        CHECK(validate(w).ok());
    }
    SUBCASE("c17 gains 7 flops") {
        Circuit c = load_bench_file(std::string(SETSIM_DATA_DIR) + "/bench/c17.bench");
        Circuit w = wrap_combinational(c);
        CHECK(w.flops().size() == 7);
        CHECK(w.gates().size() == c.gates().size());
        CHECK(w.primary_inputs().size() == c.primary_inputs().size());
        CHECK(w.primary_outputs().size() == c.primary_outputs().size());
        for (std::size_t g = 0; g < c.gates().size(); ++g) CHECK(w.gates()[g].kind == c.gates()[g].kind);
    }
    SUBCASE("sequential input rejected") {
        try {
            (void)wrap_combinational(parse_bench("INPUT(d) OUTPUT(q) q=DFF(d)"));
            FAIL("expected rejection");
        } catch (const Error& e) {
            CHECK(e.code() == "E_NOT_COMBINATIONAL");
        }
    }
    SUBCASE("fresh names avoid collisions") {
        Circuit w = wrap_combinational(parse_bench("INPUT(a) OUTPUT(y) a_ireg=NOT(a) y=NOT(a_ireg)"));
        CHECK(validate(w).ok());
        CHECK(w.flops().size() == 2);
    }
}

TEST_CASE("levelize examples") {
    SUBCASE("chain") {
        auto order = levelize(parse_bench("INPUT(a) OUTPUT(g3) g1=NOT(a) g2=NOT(g1) g3=NOT(g2)"));
        CHECK(order == std::vector<std::string>{"g1", "g2", "g3"});
    }
    SUBCASE("independent gates: deterministic") {
        Circuit c = parse_bench("INPUT(a) OUTPUT(x) OUTPUT(y) x=NOT(a) y=BUF(a)");
        auto first = levelize(c);
        CHECK(first.size() == 2);
        CHECK(levelize(c) == first);
    }
    SUBCASE("diamond") {
        auto order = levelize(parse_bench("INPUT(a) OUTPUT(g4) g4=AND(g2,g3) g2=NOT(g1) g3=BUF(g1) g1=NOT(a)"));
        REQUIRE(order.size() == 4);
        CHECK(order.front() == "g1");
        CHECK(order.back() == "g4");
    }
    SUBCASE("cycle is an error") {
        CHECK_THROWS_AS((void)levelize(parse_bench_unchecked("INPUT(x) OUTPUT(a) a=NOT(b) b=NOT(a)")), Error);
    }
}

// Random DAGs: every gate after its drivers, each exactly once.
TEST_CASE("property: levelize is a permutation respecting dependencies") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        std::ostringstream src;
        src << "INPUT(i0) INPUT(i1)\n";
        std::vector<std::string> nets = {"i0", "i1"};
        const int gates = 1 + static_cast<int>(rng() % 30);
        for (int g = 0; g < gates; ++g) {
            std::string a = nets[rng() % nets.size()], b = nets[rng() % nets.size()];
            src << "g" << g << " = NAND(" << a << ", " << b << ")\n";
            nets.push_back("g" + std::to_string(g));
        }
        src << "OUTPUT(" << nets.back() << ")\n";
        Circuit c = parse_bench(src.str());
        auto order = levelize(c);
        REQUIRE(order.size() == c.gates().size());
        CHECK(std::set<std::string>(order.begin(), order.end()).size() == order.size());
        for (const Gate& g : c.gates())
            for (NetId in : g.inputs) {
                const std::string& n = c.net_name(in);
                if (n[0] == 'g') CHECK(position(order, n) < position(order, c.net_name(g.output)));
            }
    }
}

TEST_CASE("property: bench round trip preserves structure") {
    for (const char* name : {"c17", "s27", "decoder3to8", "lfsr8", "fsm"}) {
        CAPTURE(name);
        Circuit a = load_bench_file(std::string(SETSIM_DATA_DIR) + "/bench/" + name + ".bench");
        Circuit b = parse_bench(to_bench(a), a.name());
        REQUIRE(a.gates().size() == b.gates().size());
        REQUIRE(a.flops().size() == b.flops().size());
        auto names = [](const Circuit& c, const std::vector<NetId>& v) {
            std::vector<std::string> out;
            for (NetId n : v) out.push_back(c.net_name(n));
            return out;
        };
        CHECK(names(a, a.primary_inputs()) == names(b, b.primary_inputs()));
        CHECK(names(a, a.primary_outputs()) == names(b, b.primary_outputs()));
        std::map<std::string, std::pair<GateKind, std::vector<std::string>>> ga, gb;
        for (const Gate& g : a.gates()) ga[a.net_name(g.output)] = {g.kind, names(a, g.inputs)};
        for (const Gate& g : b.gates()) gb[b.net_name(g.output)] = {g.kind, names(b, g.inputs)};
        CHECK(ga == gb);
        std::map<std::string, std::string> fa, fb;
        for (const Flop& f : a.flops()) fa[a.net_name(f.output)] = a.net_name(f.data);
        for (const Flop& f : b.flops()) fb[b.net_name(f.output)] = b.net_name(f.data);
        CHECK(fa == fb);
    }
}

TEST_CASE("topology indexes drivers and fanout") {
    Circuit c = parse_bench("INPUT(a) OUTPUT(q) n=NAND(a,a) m=NOT(n) q=DFF(m) p=DFF(n)");
    Topology t(c);
    NetId a = *c.find_net("a"), n = *c.find_net("n");
    CHECK(t.driver(a).kind == DriverKind::PrimaryInput);
    CHECK(t.driver(n).kind == DriverKind::Gate);
    CHECK(t.driver(*c.find_net("q")).kind == DriverKind::Flop);
    CHECK(t.fanout_gates(a).size() == 1);  // repeated input counted once
    CHECK(t.fanout_gates(n).size() == 1);
    CHECK(t.fanout_flops(n).size() == 1);
    CHECK_THROWS_AS(Topology(parse_bench_unchecked("INPUT(x) OUTPUT(a) a=NOT(b) b=NOT(a)")), Error);
}

TEST_CASE("gate evaluation and controlling values") {
    const std::uint8_t v01[] = {0, 1}, v11[] = {1, 1}, v00[] = {0, 0};
    CHECK_FALSE(evaluate_gate(GateKind::And, v01));
    CHECK(evaluate_gate(GateKind::Nand, v01));
    CHECK_FALSE(evaluate_gate(GateKind::Nand, v11));
    CHECK(evaluate_gate(GateKind::Or, v01));
    CHECK(evaluate_gate(GateKind::Nor, v00));
    CHECK(evaluate_gate(GateKind::Xor, v01));
    CHECK_FALSE(evaluate_gate(GateKind::Xor, v11));
    CHECK(evaluate_gate(GateKind::Xnor, v11));
    CHECK(controlling_value(GateKind::And) == false);
    CHECK(controlling_value(GateKind::Nor) == true);
    CHECK_FALSE(controlling_value(GateKind::Xor).has_value());
}
