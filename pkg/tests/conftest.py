import pytest


@pytest.fixture(autouse=True)
def console_only_logging(monkeypatch):
    """
    테스트 중에는 파일 로그를 쓰지 않는다.
    .env 의 LOG_PATH 가 있어도 파일 핸들러가 제거된 콘솔 전용 구성으로 동작.
    """
    monkeypatch.delenv("LOG_PATH", raising=False)
    monkeypatch.setenv("LOG_LEVEL", "WARNING")


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "results"
    path.mkdir()
    return path
