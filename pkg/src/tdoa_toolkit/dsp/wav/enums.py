from enum import Enum


class SampleFormat(str, Enum):
    PCM_16 = "pcm16"
    PCM_24 = "pcm24"
    PCM_32 = "pcm32"
    FLOAT_32 = "float32"

    @property
    def subtype(self) -> str:
        """libsndfile subtype name."""
        return {"pcm16": "PCM_16", "pcm24": "PCM_24", "pcm32": "PCM_32", "float32": "FLOAT"}[self.value]

    @property
    def is_integer(self) -> bool:
        return self != SampleFormat.FLOAT_32
