#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aeromap/date.hpp"
#include "aeromap/grid.hpp"
#include "aeromap/rng.hpp"
#include "aeromap/sample.hpp"

using namespace aeromap;

TEST_CASE("season boundaries") {
  CHECK(season_of(Date{2018, 1, 1}) == Season::Cold);
  CHECK(season_of(Date{2018, 4, 1}) == Season::Warm);
  CHECK(season_of(Date{2018, 9, 30}) == Season::Warm);
  CHECK(season_of(Date{2018, 10, 1}) == Season::Cold);
  CHECK(season_of(Date{2018, 3, 31}) == Season::Cold);
}

TEST_CASE("every month maps to exactly one season") {
  int warm = 0, cold = 0;
  for (int m = 1; m <= 12; ++m) {
    (season_of_month(m) == Season::Warm ? warm : cold)++;
  }
  CHECK(warm == 6);
  CHECK(cold == 6);
}

TEST_CASE("date round trips and day-of-year") {
  CHECK(Date{2018, 1, 1}.day_of_year() == 1);
  CHECK(Date{2018, 12, 31}.day_of_year() == 365);
  CHECK(Date{2020, 12, 31}.day_of_year() == 366);  // leap year
  CHECK(Date{2018, 2, 28}.plus_days(1) == Date{2018, 3, 1});
  CHECK(Date{2020, 2, 28}.plus_days(1) == Date{2020, 2, 29});
  CHECK(Date::parse("2018-07-09") == Date{2018, 7, 9});
  CHECK(Date{2018, 7, 9}.to_string() == "2018-07-09");
  CHECK_THROWS(Date::parse("2018-13-01"));
  CHECK_THROWS(Date::parse("2018-02-30"));
  CHECK_THROWS(Date::parse("not-a-date"));

  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const long long days = static_cast<long long>(rng.below(40000)) - 10000;
    CHECK(Date::from_days(days).to_days() == days);
  }
}

namespace {
GridSpec spec_3x4() {
  return GridSpec{3, 4, 35.80, 51.20, 0.01, Date{2018, 1, 1}};
}
}  // namespace

TEST_CASE("cell_of maps the origin and offsets") {
  const GridSpec spec = spec_3x4();
  auto at = cell_of(spec, 35.80, 51.20);
  REQUIRE(at.has_value());
  CHECK(*at == CellIndex{0, 0});

  // Latitude decreases with row index.
  auto south = cell_of(spec, 35.80 - 2 * 0.01, 51.20);
  REQUIRE(south.has_value());
  CHECK(south->row == 2);
  CHECK(south->col == 0);

  auto east = cell_of(spec, 35.80, 51.20 + 3 * 0.01);
  REQUIRE(east.has_value());
  CHECK(*east == CellIndex{0, 3});
}

TEST_CASE("cell_of signals out-of-bounds, never clamps") {
  const GridSpec spec = spec_3x4();
  CHECK_FALSE(cell_of(spec, 35.80 + 0.005, 51.20).has_value());  // half cell north
  CHECK_FALSE(cell_of(spec, 35.80, 51.20 - 0.005).has_value());  // half cell west
  CHECK_FALSE(cell_of(spec, 35.80 - 2 * 0.01 - 0.005, 51.20).has_value());
  CHECK_FALSE(cell_of(spec, 35.80, 51.20 + 3 * 0.01 + 0.005).has_value());
  // Just inside the half-cell boundary still maps.
  CHECK(cell_of(spec, 35.80 + 0.0049, 51.20).has_value());
}

TEST_CASE("cell centers round trip for every cell") {
  const GridSpec spec{17, 23, 35.95, 51.10, 0.01, Date{2018, 1, 1}};
  for (int r = 0; r < spec.n_rows; ++r) {
    for (int c = 0; c < spec.n_cols; ++c) {
      const auto [lat, lon] = center_of(spec, r, c);
      auto cell = cell_of(spec, lat, lon);
      REQUIRE(cell.has_value());
      CHECK(*cell == CellIndex{r, c});
    }
  }
}

TEST_CASE("join compatibility is an equivalence relation") {
  const GridSpec a = spec_3x4();
  GridSpec b = a;
  b.timestamp = Date{2019, 5, 5};  // timestamp does not matter
  GridSpec c = a;
  c.origin_lon += 0.01;

  CHECK(a.join_compatible(a));                       // reflexive
  CHECK(a.join_compatible(b));
  CHECK(b.join_compatible(a));                       // symmetric
  CHECK_FALSE(a.join_compatible(c));
  GridSpec d = b;
  d.timestamp = Date{2020, 1, 1};
  CHECK((a.join_compatible(b) && b.join_compatible(d) && a.join_compatible(d)));  // transitive
}

TEST_CASE("raster storage and missing sentinel") {
  Raster r(spec_3x4(), "aod");
  CHECK(r.values.size() == 12);
  CHECK(r.missing_count() == 12);
  r.at(1, 2) = 0.5;
  CHECK(r.missing_count() == 11);
  CHECK(r.at(1, 2) == 0.5);
  CHECK(is_missing(kMissing));
  CHECK_FALSE(is_missing(0.0));
}

TEST_CASE("feature name table") {
  CHECK(kFeatureNames.size() == 19);
  CHECK(feature_index("AODm") == 0);
  CHECK(feature_index("DOY") == 18);
  CHECK(feature_index("nope") == std::nullopt);
  // All names unique.
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
    CHECK(feature_index(kFeatureNames[i]) == i);
  }
}
