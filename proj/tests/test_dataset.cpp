#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "shiftiv/common.hpp"
#include "shiftiv/dataset.hpp"

using namespace shiftiv;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/shiftiv_test_" + name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

const ColumnMapping kMap{"y", "a", "z", {"x1", "x2"}};

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("loads reordered columns and ignores extras") {
    const std::string path = write_temp(
        "ok.csv", "x2,z,unused,y,a,x1\n0.5,1.25,9,3.5,1,-2\n0,0,9,-1,0,4\n");
    const Dataset d = load_csv(path, kMap);
    REQUIRE(d.n() == 2);
    CHECK(d.dim_x() == 2);
    CHECK(d.covariate_names[0] == "x1");
    CHECK(d.observations[0].y == 3.5);
    CHECK(d.observations[0].a == 1.0);
    CHECK(d.observations[0].z == 1.25);
    CHECK(d.observations[0].x[0] == -2.0);
    CHECK(d.observations[0].x[1] == 0.5);
    CHECK(d.observations[1].a == 0.0);
  }

  TEST_CASE("handles CRLF line endings") {
    const std::string path =
        write_temp("crlf.csv", "y,a,z,x1,x2\r\n1,0,2,3,4\r\n");
    const Dataset d = load_csv(path, kMap);
    REQUIRE(d.n() == 1);
    CHECK(d.observations[0].x[1] == 4.0);
  }

  TEST_CASE("missing column is named") {
    const std::string path = write_temp("miss.csv", "y,a,z,x1\n1,0,2,3\n");
    try {
      load_csv(path, kMap);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::MissingColumn);
      CHECK(e.cls() == ErrClass::Data);
      CHECK(std::string(e.what()).find("x2") != std::string::npos);
    }
  }

  TEST_CASE("non numeric cell reports its location") {
    const std::string path =
        write_temp("nan.csv", "y,a,z,x1,x2\n1,0,2,3,4\n1,0,oops,3,4\n");
    try {
      load_csv(path, kMap);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::NonNumericCell);
      CHECK(std::string(e.what()).find("z") != std::string::npos);
    }
  }

  TEST_CASE("treatment must be exactly zero or one") {
    const std::string path =
        write_temp("bin.csv", "y,a,z,x1,x2\n1,0.5,2,3,4\n");
    CHECK_THROWS_AS(load_csv(path, kMap), Error);
    try {
      load_csv(path, kMap);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::NonBinaryTreatment);
    }
  }

  TEST_CASE("ragged rows are rejected") {
    const std::string path = write_temp("rag.csv", "y,a,z,x1,x2\n1,0,2,3\n");
    CHECK_THROWS_AS(load_csv(path, kMap), Error);
  }

  TEST_CASE("missing file and empty file fail with io errors") {
    CHECK_THROWS_AS(load_csv("/tmp/shiftiv_does_not_exist.csv", kMap), Error);
    const std::string path = write_temp("empty.csv", "");
    try {
      load_csv(path, kMap);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.cls() == ErrClass::Data);
    }
  }

  TEST_CASE("save and load round trip preserves every value") {
    Dataset d;
    d.covariate_names = {"x1", "x2"};
    d.observations = {
        {0.1234567890123456, 1.0, -2.25, {1e-300, 3.141592653589793}},
        {-7.5e10, 0.0, 0.3333333333333333, {0.0, -1.0}},
    };
    const std::string path = "/tmp/shiftiv_test_roundtrip.csv";
    save_csv(d, path);
    const Dataset back = load_csv(path, kMap);
    REQUIRE(back.n() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(back.observations[i].y == d.observations[i].y);
      CHECK(back.observations[i].a == d.observations[i].a);
      CHECK(back.observations[i].z == d.observations[i].z);
      CHECK(back.observations[i].x == d.observations[i].x);
    }
  }

  TEST_CASE("validate flags non finite values with row numbers") {
    Dataset d;
    d.covariate_names = {"x1"};
    d.observations = {{1.0, 1.0, 0.0, {0.0}},
                      {std::nan(""), 0.0, 0.0, {0.0}}};
    const ValidationReport report = validate(d);
    CHECK(!report.ok());
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].row == 1);
    CHECK(report.to_json().find("finite") != std::string::npos);

    d.observations[1].y = 2.0;
    CHECK(validate(d).ok());
  }

  TEST_CASE("fold split is balanced, complete, and seeded") {
    const FoldAssignment f = kfold_split(103, 5, 42);
    REQUIRE(f.fold_of.size() == 103);
    std::vector<int> sizes(5, 0);
    for (int id : f.fold_of) {
      REQUIRE(id >= 0);
      REQUIRE(id < 5);
      ++sizes[static_cast<std::size_t>(id)];
    }
    for (int s : sizes) {
      CHECK(s >= 20);
      CHECK(s <= 21);
    }
    CHECK(kfold_split(103, 5, 42).fold_of == f.fold_of);
    CHECK(kfold_split(103, 5, 43).fold_of != f.fold_of);
  }

  TEST_CASE("fold split rejects bad counts") {
    CHECK_THROWS_AS(kfold_split(10, 1, 0), Error);
    CHECK_THROWS_AS(kfold_split(10, 11, 0), Error);
    try {
      kfold_split(10, 1, 0);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrKind::BadFoldCount);
      CHECK(e.cls() == ErrClass::Config);
    }
  }

  TEST_CASE("single assignment uses one fold everywhere") {
    const FoldAssignment f = FoldAssignment::single(4);
    CHECK(f.k == 1);
    CHECK(f.fold_of == std::vector<int>{0, 0, 0, 0});
  }
}
