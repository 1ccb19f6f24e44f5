#include <gtest/gtest.h>

#include <random>
#include <regex>
#include <sstream>

#include "latentplan/error.hpp"
#include "latentplan/viz.hpp"

namespace lp::viz {
namespace {

using chess::Position;

nn::EncoderConfig micro() { return {1, 16, 8, 2, 16, 0.0, lp::vocab_size(), kSeqLen}; }

nn::Matrix<float> planar(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(d, [&] { return g(rng); }).normalized();
  Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(d, [&] { return g(rng); });
  v = (v - v.dot(u) * u).normalized();
  Eigen::VectorXd c = Eigen::VectorXd::NullaryExpr(d, [&] { return g(rng); });
  nn::Matrix<float> x(n, d);
  for (int i = 0; i < n; ++i) x.row(i) = (c + 3 * g(rng) * u + g(rng) * v).cast<float>().transpose();
  return x;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

// Minimal well-formedness check: balanced tags, quoted attributes.
bool well_formed(const std::string& xml, std::string& why) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = xml.find('<', i)) != std::string::npos) {
    if (xml.compare(i, 5, "<?xml") == 0) {
      i = xml.find("?>", i) + 2;
      continue;
    }
    if (xml.compare(i, 2, "</") == 0) {
      auto end = xml.find('>', i);
      std::string name = xml.substr(i + 2, end - i - 2);
      if (stack.empty() || stack.back() != name) return why = "unbalanced </" + name + ">", false;
      stack.pop_back();
      i = end + 1;
      continue;
    }
    auto end = xml.find('>', i);
    std::smatch m;
    std::string tag = xml.substr(i, end - i + 1);
    if (!std::regex_match(tag, m, std::regex(R"(<([A-Za-z][\w:-]*)((\s+[\w:-]+="[^"<]*")*)\s*(/?)>)")))
      return why = "bad tag " + tag, false;
    if (m[4].str().empty()) stack.push_back(m[1].str());
    i = end + 1;
  }
  if (!stack.empty()) return why = "unclosed <" + stack.back() + ">", false;
  return true;
}

TEST(Projection, PlanarDataIsFullyExplained) {
  auto x = planar(200, 16, 3);
  auto p = fit_projection(x);
  EXPECT_NEAR(p.explained[0] + p.explained[1], 1.0, 1e-6);
  EXPECT_GT(p.explained[0], p.explained[1]);
  double n0 = 0, n1 = 0, dot = 0;
  for (int i = 0; i < 16; ++i) {
    n0 += p.basis[0][i] * p.basis[0][i];
    n1 += p.basis[1][i] * p.basis[1][i];
    dot += p.basis[0][i] * p.basis[1][i];
  }
  EXPECT_NEAR(n0, 1, 1e-6);
  EXPECT_NEAR(n1, 1, 1e-6);
  EXPECT_NEAR(dot, 0, 1e-6);
  for (const auto& b : p.basis) {
    auto first = std::find_if(b.begin(), b.end(), [](double v) { return std::abs(v) > 1e-12; });
    ASSERT_NE(first, b.end());
    EXPECT_GT(*first, 0);
  }
}

TEST(Projection, SignConventionSurvivesNegatedData) {
  auto x = planar(100, 8, 5);
  nn::Matrix<float> neg = -x;
  auto a = fit_projection(x), b = fit_projection(neg);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(a.basis[k][i], b.basis[k][i], 1e-6);
}

TEST(Projection, DegenerateInputs) {
  nn::Matrix<float> same = nn::Matrix<float>::Ones(10, 6);
  EXPECT_EQ(code_of([&] { fit_projection(same); }), ErrorCode::kDegenerate);
  nn::Matrix<float> line(10, 6);
  for (int i = 0; i < 10; ++i) line.row(i) = nn::RowVector<float>::Constant(6, static_cast<float>(i));
  EXPECT_EQ(code_of([&] { fit_projection(line); }), ErrorCode::kDegenerate);
  EXPECT_EQ(code_of([&] { fit_projection(planar(2, 6, 1)); }), ErrorCode::kInvalidArgument);
}

TEST(Projection, RepeatedProjectionIsIdentical) {
  auto x = planar(50, 8, 9);
  auto p = fit_projection(x);
  std::span<const float> row(x.data(), 8);
  auto a = p.project(row), b = p.project(row);
  EXPECT_EQ(a, b);
  EXPECT_THROW(p.project(std::span<const float>(x.data(), 7)), Error);
}

struct Fixture {
  nn::ModelWeights weights = nn::init_parameters<float>(micro(), 21);
  plan::EncoderEmbedder embedder{weights};
  plan::AdvantageAxis axis;
  Projection projection;

  Fixture() {
    std::vector<Position> ref;
    Position p = Position::start();
    std::mt19937_64 rng(1);
    for (int i = 0; i < 40; ++i) {
      ref.push_back(p);
      auto moves = chess::legal_moves(p);
      if (moves.empty()) break;
      p = chess::apply_move_unchecked(p, moves[rng() % moves.size()]);
    }
    projection = fit_projection(embedder.embed(ref));
    axis = plan::compute_axis(embedder, std::span(ref).subspan(0, 10), std::span(ref).subspan(20, 10));
  }
};

std::vector<chess::Move> parse_line(const std::vector<std::string>& uci) {
  Position p = Position::start();
  std::vector<chess::Move> out;
  for (const auto& s : uci) {
    auto m = chess::parse_uci(p, s);
    out.push_back(*m);
    p = chess::apply_move(p, *m);
  }
  return out;
}

TEST(Trajectory, RecordPerPositionIncludingStart) {
  Fixture f;
  auto moves = parse_line({"e2e4", "e7e5", "g1f3", "b8c6"});
  auto t = trajectory(f.embedder, f.axis, f.projection, moves);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(t[0].fen, Position::start().fen());
  for (int i = 0; i < 5; ++i) EXPECT_EQ(t[i].ply, i);
}

TEST(Trajectory, ExportsAreDeterministicAndSelfContained) {
  Fixture f;
  auto moves = parse_line({"f2f3", "e7e5", "g2g4", "d8h4"});
  auto render = [&] {
    auto t = trajectory(f.embedder, f.axis, f.projection, moves);
    std::ostringstream tsv, svg;
    write_trajectory_tsv(tsv, t);
    write_trajectory_svg(svg, t, f.projection, f.axis, "fool's mate <test>");
    return std::make_pair(tsv.str(), svg.str());
  };
  auto a = render(), b = render();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
  EXPECT_EQ(a.first.rfind("# ", 0), 0u);
  EXPECT_NE(a.first.find("ply\tfen\tx\ty\tscore\tp_white\n"), std::string::npos);
  std::string why;
  EXPECT_TRUE(well_formed(a.second, why)) << why;
  EXPECT_EQ(a.second.find("href"), std::string::npos);
  EXPECT_EQ(a.second.find("<image"), std::string::npos);
  EXPECT_NE(a.second.find("marker-end"), std::string::npos);
  EXPECT_NE(a.second.find("&lt;test&gt;"), std::string::npos);
  EXPECT_NE(a.second.find("does not show its true geometry"), std::string::npos);
}

TEST(Trajectory, IllegalMoveNamesPly) {
  Fixture f;
  auto moves = parse_line({"e2e4", "e7e5"});
  moves.push_back(chess::Move{12, 20});  // e2e3, pawn already gone
  try {
    trajectory(f.embedder, f.axis, f.projection, moves);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIllegalMove);
    EXPECT_NE(std::string(e.what()).find("ply 3"), std::string::npos) << e.what();
  }
}

TEST(Scatter, SvgIsWellFormed) {
  Fixture f;
  std::vector<ScatterPoint> pts{{0, 0, 0.0}, {1, 2, 0.5}, {-1, 0.5, 1.0}};
  std::ostringstream svg, tsv;
  write_scatter_svg(svg, pts, f.projection, f.axis);
  write_scatter_tsv(tsv, pts);
  std::string why;
  EXPECT_TRUE(well_formed(svg.str(), why)) << why;
  EXPECT_NE(svg.str().find("#b2182b"), std::string::npos);  // p = 1 is red
  EXPECT_NE(svg.str().find("#2166ac"), std::string::npos);  // p = 0 is blue
  EXPECT_NE(tsv.str().find("x\ty\tp_white\n"), std::string::npos);
}

}  // namespace
}  // namespace lp::viz
