#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "qvi/errors.hpp"
#include "qvi/field_io.hpp"

using namespace qvi;

TEST_SUITE("field_io") {

TEST_CASE("header round trip") {
    Grid g({{0.0, 1.0}, {-0.5, 2.25}}, {5, 12});
    CHECK(grid_header(g) == "# grid n=2 counts=5,12 bounds=0:1,-0.5:2.25");
    CHECK(parse_grid_header(grid_header(g)) == g);
    CHECK_THROWS_AS(parse_grid_header("# grid n=2 counts=5 bounds=0:1,0:1"), Error);
}

TEST_CASE("csv round trip is bit exact") {
    std::mt19937_64 rng(4);
    Grid g({{0.0, 1.0}, {0.0, 3.0}, {-1.0, 1.0}}, {4, 3, 5});
    const GridField u = testutil::random_field(g, rng, -1e6, 1e6);
    std::stringstream ss;
    write_field_csv(ss, u);
    const GridField back = read_field_csv(ss);
    REQUIRE(back.grid() == g);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(back[k] == u[k]);
    CHECK(format_real(0.1) == "0.10000000000000001");
}

TEST_CASE("rows out of order are rejected") {
    Grid g({{0.0, 1.0}}, {3});
    std::stringstream ss;
    ss << grid_header(g) << "\n1,0.5,1\n0,0,1\n2,1,1\n";
    CHECK_THROWS_AS(read_field_csv(ss), Error);
}

TEST_CASE("node table carries extra columns") {
    Grid g({{0.0, 1.0}}, {5});
    std::stringstream ss;
    write_node_table(ss, g, {1, 3}, {{"regular", "0.5"}, {"singular", "0.1"}});
    CHECK(ss.str() == "# grid n=1 counts=5 bounds=0:1\n1,0.25,regular,0.5\n3,0.75,singular,0.1\n");
    CHECK_THROWS_AS(write_node_table(ss, g, {1}, {}), ShapeError);
}

}
