// Writes fixed-seed synthetic datasets as CSV.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mapper/synthetic.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Generate synthetic point clouds"};
  std::string kind, out;
  std::size_t n = 1000, d = 2;
  std::uint64_t seed = 1;
  app.add_option("kind", kind, "circle | snowman | uniform | blobs")
      ->required()
      ->check(CLI::IsMember({"circle", "snowman", "uniform", "blobs"}));
  app.add_option("-o,--output", out, "Output CSV path")->required();
  app.add_option("-n,--rows", n, "Number of points")->capture_default_str();
  app.add_option("-d,--dims", d, "Dimensions (uniform, blobs)")->capture_default_str();
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  using namespace mapper::synthetic;
  std::string text;
  if (kind == "circle") {
    text = to_csv(circle(n, seed).cloud);
  } else if (kind == "snowman") {
    text = to_csv(snowman(n, seed));
  } else if (kind == "uniform") {
    text = to_csv(uniform(n, d, seed));
  } else {
    std::vector<std::vector<double>> centres(3, std::vector<double>(d, 0.0));
    for (std::size_t c = 0; c < 3; ++c)
      centres[c][c % d] = 10.0 * static_cast<double>(c + 1);
    text = to_csv(blobs(n, centres, 0.5, seed));
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot write " << out << '\n';
    return 3;
  }
  f << text;
  return 0;
}
