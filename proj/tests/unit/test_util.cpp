#include <doctest.h>

#include <cmath>
#include <limits>

#include "attackmap/errors.hpp"
#include "attackmap/util.hpp"

using namespace attackmap;

TEST_CASE("decimal rendering round-trips bit for bit") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(200)) - 100);
        CHECK(parse_decimal(format_decimal(v)) == v);
    }
    CHECK(parse_decimal(format_decimal(0.1)) == 0.1);
    CHECK(parse_decimal(format_decimal(std::numeric_limits<double>::denorm_min())) ==
          std::numeric_limits<double>::denorm_min());
    CHECK_THROWS_AS(parse_decimal("1.5x"), ParseError);
    CHECK_THROWS_AS(parse_decimal(""), ParseError);
}

TEST_CASE("fingerprints are stable and order sensitive") {
    CHECK(fingerprint_of("") == "6d19e938bfe4af54");
    CHECK(fingerprint_of("a") == "e0e55ac37191433c");
    CHECK(Fingerprint().add("ab").add("c").hex() != Fingerprint().add("a").add("bc").hex());
}

TEST_CASE("seeded generator is reproducible and in range") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.below(7) < 7);
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("csv fields are quoted only when needed") {
    std::string out;
    append_csv_field(out, "plain");
    out += ',';
    append_csv_field(out, "a,b");
    out += ',';
    append_csv_field(out, "say \"hi\"");
    out += ',';
    append_csv_field(out, " padded");
    CHECK(out == "plain,\"a,b\",\"say \"\"hi\"\"\",\" padded\"");
}

TEST_CASE("text helpers") {
    CHECK(trim("  x y \n") == "x y");
    CHECK(trim("   ").empty());
    CHECK(to_lower_ascii("PowerShell T1059") == "powershell t1059");
}
