#include "mpoforge/config.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

using namespace mpoforge;

TEST(Config, ParsesKeysCommentsAndBlankLines) {
  auto s = config::parse_text(
      "# header comment\n"
      "model = tfi\n"
      "\n"
      "epsilon=0.01  # inline comment\n"
      "tag = run#7\n");
  EXPECT_EQ(s.get("model", ""), "tfi");
  EXPECT_DOUBLE_EQ(s.get_double("epsilon", 0.0), 0.01);
  EXPECT_EQ(s.get("tag", ""), "run#7");  // '#' glued to a value is data
  EXPECT_FALSE(s.has("header"));
}

TEST(Config, LaterAssignmentsWinAndOrderTracksFirstUse) {
  auto s = config::parse_text("a = 1\nb = 2\na = 3\n");
  EXPECT_EQ(s.get_int("a", 0), 3);
  ASSERT_EQ(s.order.size(), 2u);
  EXPECT_EQ(s.order[0], "a");
  EXPECT_EQ(s.order[1], "b");
}

TEST(Config, TypedGetters) {
  auto s = config::parse_text(
      "d = 64\nx = 2.5e-3\nflag = yes\noff_flag = 0\nladder = 1e-1, 5e-2,2e-2\n");
  EXPECT_EQ(s.get_int("d", -1), 64);
  EXPECT_DOUBLE_EQ(s.get_double("x", 0.0), 2.5e-3);
  EXPECT_TRUE(s.get_bool("flag", false));
  EXPECT_FALSE(s.get_bool("off_flag", true));
  auto v = s.get_list("ladder", {});
  ASSERT_EQ(v.size(), 3u);
  EXPECT_DOUBLE_EQ(v[0], 0.1);
  EXPECT_DOUBLE_EQ(v[2], 0.02);
  // fallbacks pass through untouched
  EXPECT_EQ(s.get_int("missing", 7), 7);
  EXPECT_TRUE(s.get_list("missing", {1.0}).size() == 1);
}

TEST(Config, MalformedInputThrows) {
  EXPECT_THROW(config::parse_text("just a bare line\n"), Error);
  EXPECT_THROW(config::parse_text("= value\n"), Error);
  auto s = config::parse_text("x = 1.5oops\nn = 2.5\nb = maybe\nl = 1,,2\n");
  EXPECT_THROW(s.get_double("x", 0.0), Error);
  EXPECT_THROW(s.get_int("n", 0), Error);
  EXPECT_THROW(s.get_bool("b", false), Error);
  EXPECT_THROW(s.get_list("l", {}), Error);
}

TEST(Config, OverridesAndFiles) {
  auto s = config::parse_text("d = 8\n");
  config::apply_override(s, "d=16");
  config::apply_override(s, "out = /tmp/x");
  EXPECT_EQ(s.get_int("d", 0), 16);
  EXPECT_EQ(s.get("out", ""), "/tmp/x");
  EXPECT_THROW(config::apply_override(s, "no_equals"), Error);
  EXPECT_THROW(config::apply_override(s, "=bad"), Error);

  const std::string path = ::testing::TempDir() + "mpoforge_config_test.cfg";
  {
    std::ofstream out(path);
    out << "model = heisenberg\nd = 32\n";
  }
  auto f = config::parse_file(path);
  EXPECT_EQ(f.get("model", ""), "heisenberg");
  EXPECT_EQ(f.get_int("d", 0), 32);
  std::remove(path.c_str());
  EXPECT_THROW(config::parse_file("/nonexistent/path.cfg"), Error);
}
