"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class SubmitRequest(BaseModel):
    kind: Literal["power", "merror"]
    config: dict
    data_csv: Optional[str] = Field(default=None, description="inline CSV dataset (merror only)")
    synthetic: Optional[dict] = Field(default=None, description="synthetic dataset spec (merror only)")


class SubmitResponse(BaseModel):
    id: str
    status_url: str


class JobStatusResponse(BaseModel):
    id: str
    kind: str
    state: Literal["queued", "running", "done", "failed", "cancelled"]
    progress: float
    submitted_at: Optional[str]
    started_at: Optional[str]
    finished_at: Optional[str]
    error: Optional[str] = None
    results_url: Optional[str] = None


class ValidationIssueModel(BaseModel):
    path: str
    message: str


class ValidationErrorResponse(BaseModel):
    errors: list[ValidationIssueModel]
