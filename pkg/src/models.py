"""SQLAlchemy models for tuning and cross-validation results"""

from datetime import datetime
from typing import Optional
from sqlalchemy import String, Integer, Float, DateTime, Text, ForeignKey
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship


class Base(DeclarativeBase):
    pass


class Run(Base):
    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    command: Mapped[str] = mapped_column(String(16), nullable=False)
    created_at: Mapped[datetime] = mapped_column(DateTime, nullable=False)
    manifest: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    best_lambda: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    best_gamma: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    best_mu: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    best_eta: Mapped[Optional[float]] = mapped_column(Float, nullable=True)

    trials: Mapped[list["TrialRecord"]] = relationship(
        back_populates="run", cascade="all, delete-orphan", order_by="TrialRecord.id"
    )
    rotations: Mapped[list["RotationRecord"]] = relationship(
        back_populates="run", cascade="all, delete-orphan", order_by="RotationRecord.rotation"
    )


class TrialRecord(Base):
    __tablename__ = "trials"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[int] = mapped_column(ForeignKey("runs.id"), nullable=False)
    position: Mapped[int] = mapped_column(Integer, nullable=False)
    lambda_: Mapped[float] = mapped_column("lambda", Float, nullable=False)
    gamma: Mapped[float] = mapped_column(Float, nullable=False)
    mu: Mapped[float] = mapped_column(Float, nullable=False)
    eta: Mapped[float] = mapped_column(Float, nullable=False)
    loss: Mapped[float] = mapped_column(Float, nullable=False)
    status: Mapped[str] = mapped_column(String(16), default="ok")
    iterations: Mapped[int] = mapped_column(Integer, default=0)

    run: Mapped["Run"] = relationship(back_populates="trials")


class RotationRecord(Base):
    __tablename__ = "rotations"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[int] = mapped_column(ForeignKey("runs.id"), nullable=False)
    rotation: Mapped[int] = mapped_column(Integer, nullable=False, index=True)
    rmse: Mapped[float] = mapped_column(Float, nullable=False)
    n_pairs: Mapped[int] = mapped_column(Integer, nullable=False)
    train_seconds: Mapped[float] = mapped_column(Float, nullable=False)
    tune_seconds: Mapped[float] = mapped_column(Float, default=0.0)

    run: Mapped["Run"] = relationship(back_populates="rotations")
