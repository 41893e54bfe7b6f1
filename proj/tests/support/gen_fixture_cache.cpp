// Regenerates tests/fixtures/replay_cache.jsonl by running the full pipeline
// in record mode against the deterministic fake model.
//
//   gen_fixture_cache <corpus.jsonl> <cache_out.jsonl> [scratch_dir]

#include <cstdio>
#include <filesystem>

#include "cotcheck/pipeline.hpp"
#include "support/fake_model.hpp"

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <corpus.jsonl> <cache_out.jsonl> [scratch_dir]\n",
                     argv[0]);
        return 1;
    }
    cotcheck::RunConfig cfg;
    cfg.corpus_path = argv[1];
    cfg.output_dir = argc > 3 ? argv[3]
                              : (std::filesystem::temp_directory_path() / "cotcheck_gen_out");
    cfg.seed = 0;
    cfg.gateway.mode = cotcheck::GatewayMode::record;
    cfg.gateway.cache_path = argv[2];
    cfg.gateway.endpoint_url = "http://fake.local/v1/chat/completions";
    cfg.gateway.concurrency = 1;  // keep the cache file order canonical

    std::filesystem::remove(cfg.gateway.cache_path);
    cotcheck::Pipeline pipeline(cfg, fake_model::transport());
    const auto result = pipeline.run();
    if (!result.all_ok) {
        std::fprintf(stderr, "pipeline reported failed sections:\n%s\n",
                     result.report.dump(2).c_str());
        return 2;
    }
    std::printf("cache written to %s\n", argv[2]);
    return 0;
}
