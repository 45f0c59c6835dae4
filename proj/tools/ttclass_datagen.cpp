#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ttclass/dataset.hpp"
#include "ttclass/synth.hpp"

// Writes a deterministic synthetic digit set as an IDX file pair, for
// offline runs of the full pipeline when the real corpora are unavailable.
int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic 28x28 digit dataset in IDX format"};

    long long count = 1000;
    std::uint64_t seed = 1;
    std::string images_path = "images-idx3-ubyte";
    std::string labels_path = "labels-idx1-ubyte";
    app.add_option("--count", count, "number of images")->capture_default_str();
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--out-images", images_path, "output IDX image file")->capture_default_str();
    app.add_option("--out-labels", labels_path, "output IDX label file")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const ttclass::Dataset ds = ttclass::make_synthetic_digits(count, seed);
        ttclass::save_idx(ds, images_path, labels_path);
        std::cout << "wrote " << count << " images to " << images_path << " / " << labels_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "ttclass-datagen: error: " << e.what() << "\n";
        return 1;
    }
}
