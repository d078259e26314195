#include <filesystem>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "golden.hpp"
#include "qthermo_cli/commands.hpp"

namespace fs = std::filesystem;

namespace {

fs::path run_config(const std::string& stem, const fs::path& out) {
    qthermo::cli::CommonArgs a;
    a.config_path = std::string(QTHERMO_CONFIG_DIR) + "/" + stem + ".yaml";
    a.out_dir = out.string();
    std::ostringstream o, e;
    const int code = qthermo::cli::cmd_simulate(a, o, e);
    EXPECT_EQ(code, qthermo::cli::kExitOk) << e.str();
    return out;
}

class Golden : public ::testing::TestWithParam<std::string> {};

} // namespace

TEST_P(Golden, MatchesFrozenOutput) {
    const std::string stem = GetParam();
    const fs::path tmp = fs::temp_directory_path() / ("qthermo_golden_" + std::to_string(::getpid()) + "_" + stem);
    fs::remove_all(tmp);
    run_config(stem, tmp);
    const fs::path frozen = fs::path(QTHERMO_GOLDEN_DIR) / stem;
    for (const std::string& name : golden::artifacts()) {
        if (golden::regenerate()) {
            fs::create_directories(frozen);
            fs::copy_file(tmp / name, frozen / name, fs::copy_options::overwrite_existing);
            continue;
        }
        ASSERT_TRUE(fs::exists(frozen / name)) << "missing " << (frozen / name) << "; run with QTHERMO_REGEN_GOLDEN=1";
        EXPECT_EQ(golden::diff_artifact(name, golden::slurp(frozen / name), golden::slurp(tmp / name)), "")
            << stem << "/" << name;
    }
    fs::remove_all(tmp);
}

INSTANTIATE_TEST_SUITE_P(Protocols, Golden, ::testing::ValuesIn(golden::protocols()));

TEST(Comparator, ToleratesRoundingOnly) {
    EXPECT_EQ(golden::diff_csv("t,x\n0,1.0\n", "t,x\n0,1.0000000000001\n"), "");
    EXPECT_NE(golden::diff_csv("t,x\n0,1.0\n", "t,x\n0,1.001\n"), "");
    EXPECT_NE(golden::diff_csv("t,x\n0,a\n", "t,x\n0,b\n"), "");
    EXPECT_NE(golden::diff_csv("t,x\n0,1\n", "t,x\n0,1\n1,2\n"), "");
    EXPECT_NE(golden::diff_csv("t,x\n0,1\n", "t,x\n0,1,\n"), "");

    EXPECT_EQ(golden::diff_json(nlohmann::json::parse(R"({"a":[1,2],"b":"x"})"),
                                nlohmann::json::parse(R"({"a":[1,2.0000000000001],"b":"x"})")), "");
    EXPECT_NE(golden::diff_json(nlohmann::json::parse(R"({"a":1})"), nlohmann::json::parse(R"({"a":1,"c":2})")), "");
    EXPECT_NE(golden::diff_json(nlohmann::json::parse(R"({"v":true})"), nlohmann::json::parse(R"({"v":false})")), "");
    EXPECT_NE(golden::diff_json(nlohmann::json::parse(R"({"w":0.5})"), nlohmann::json::parse(R"({"w":0.5001})")), "");
}
