#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <span>

#include "softq/io.hpp"
#include "test_util.hpp"

using namespace softq;

namespace {

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(MdpDocument, RoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto inst = testutil::seeded_instance(seed, 2 + seed % 7, 1 + seed % 4, 0.95, 3, 0.6);
    const std::string text = io::dump(io::to_json(inst.mdp, inst.tasks));
    const io::MdpDocument back = io::mdp_document_from_json(io::parse(text));
    ASSERT_TRUE(bit_equal(back.mdp.transition(), inst.mdp.transition())) << "seed " << seed;
    EXPECT_EQ(back.mdp.discount(), inst.mdp.discount());
    ASSERT_EQ(back.tasks.labels(), inst.tasks.labels());
    for (std::size_t i = 0; i < inst.tasks.size(); ++i) {
      EXPECT_TRUE(bit_equal(back.tasks.reward(i).values().data(),
                            inst.tasks.reward(i).values().data()));
    }
  }
}

TEST(MdpDocument, FileRoundTripWithTerminal) {
  const FiniteMdp mdp(2, 1, {0.25, 0.75, 0.0, 1.0}, 0.9, {false, true});
  const TaskSet tasks(mdp, {testutil::reward_rows({{0.1}, {0.0}})}, {"only"});
  const auto path = std::filesystem::temp_directory_path() / "softq_io_test" / "mdp.json";
  io::write_mdp_file(path, mdp, tasks);
  const auto back = io::read_mdp_file(path);
  EXPECT_EQ(back.mdp, mdp);
  EXPECT_TRUE(back.mdp.is_terminal(1));
  EXPECT_EQ(back.tasks.label(0), "only");
  std::filesystem::remove_all(path.parent_path());
}

TEST(MdpDocument, RejectsUnknownFieldsAndBadShapes) {
  auto doc = io::to_json(testutil::single_state_mdp(1, 0.5),
                         TaskSet(testutil::single_state_mdp(1, 0.5), {}, {}));
  doc["extra"] = 1;
  EXPECT_THROW(io::mdp_document_from_json(doc), io::FormatError);
  doc.erase("extra");
  doc["num_states"] = 2;
  EXPECT_THROW(io::mdp_document_from_json(doc), io::FormatError);
  EXPECT_THROW(io::parse("{not json"), io::FormatError);
}

TEST(QTableDocument, CarriesTemperature) {
  const QTable q(Matrix::from_rows({{1.0, 0.1 + 0.2}}), 0.25);
  const auto j = io::to_json(q);
  EXPECT_EQ(j.at("temperature").get<double>(), 0.25);
  const QTable back = io::q_table_from_json(io::parse(io::dump(j)));
  EXPECT_EQ(back.values(), q.values());
  EXPECT_EQ(back.temperature(), 0.25);
}

TEST(CertificateDocument, InfinityBecomesNull) {
  BoundCertificate cert;
  cert.c_star = Matrix(1, 1, std::numeric_limits<double>::infinity());
  cert.d_star = cert.c_star;
  cert.lemma_upper_slack = Matrix(1, 1, 0.0);
  cert.lemma_lower_slack = cert.c_star;
  cert.theorem_slack = cert.c_star;
  cert.corollary_upper_slack = {0.0};
  cert.corollary_lower_slack = {std::numeric_limits<double>::infinity()};
  const auto j = io::parse(io::dump(io::to_json(cert)));
  EXPECT_TRUE(j.at("c_star")[0][0].is_null());
  EXPECT_EQ(j.at("summary").at("status"), "vacuous");
  EXPECT_TRUE(j.at("summary").at("valid").get<bool>());
}
