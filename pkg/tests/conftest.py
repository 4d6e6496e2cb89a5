import pytest

from hdeeg import Label, PipelineParams, SyntheticSpec, generate_synthetic


@pytest.fixture(scope="session")
def small_params():
    """Shrunk pipeline for fast integration tests: 1792 raw samples become
    192 quantized samples, six 32-sample windows per channel."""
    return PipelineParams(
        dimension=2000,
        level_count=50,
        ngram_size=32,
        drop_samples=256,
        downsample_factor=8,
        seed=9,
    )


@pytest.fixture(scope="session")
def small_spec():
    return SyntheticSpec(patients_per_class=4, samples=1792, seed=21)


@pytest.fixture(scope="session")
def small_dataset(small_spec):
    return generate_synthetic(small_spec)


@pytest.fixture(scope="session")
def small_counts():
    train = {Label.ADHD: 2, Label.CONTROL: 2}
    test = {Label.ADHD: 2, Label.CONTROL: 2}
    return train, test
